//! Fixtures shared by the criterion benchmarks.

use glt_core::data::{
    chronological_split, generate_synthetic, make_windows, normalize, NormalizationMode, NormalizationSpec, RoadNetworkSpec,
    SpeedSeries, SynthConfig, Topology, WindowSample, DEFAULT_FRACTIONS,
};
use glt_core::graph::{build_graph, GraphConfig};
use glt_core::model::{init_params, GltModel};

pub struct Fixture {
    pub train: SpeedSeries,
    pub network: RoadNetworkSpec,
    pub model: GltModel,
    pub windows: Vec<WindowSample>,
}

/// A trained-size model on a synthetic chain of `links` links.
pub fn fixture(links: usize, window: usize) -> Fixture {
    let (series, network) = generate_synthetic(&SynthConfig::new(links, 7, 7, Topology::Chain)).expect("synthetic data");
    let split = chronological_split(&series, DEFAULT_FRACTIONS).expect("split");
    let graph = build_graph(&network, &split.train, &GraphConfig::default()).expect("graph");
    let norm = NormalizationSpec::new(NormalizationMode::MaxScale, 100.0).expect("scale");
    let windows = make_windows(&normalize(&split.train, &norm).expect("normalize"), window, 1).expect("windows");
    Fixture {
        train: split.train,
        network,
        model: init_params(graph.ultimate, 1, 0.2).expect("init"),
        windows,
    }
}
