//! Speed histories, road networks, chronological splits, supervised windows
//! and normalization.

mod io;
mod series;
mod synth;

pub use io::{load_road_network, load_speed_csv, read_matrix_csv, write_matrix_csv, write_road_network, write_speed_csv};
pub use series::{
    chronological_split, denormalize, impute_missing, make_windows, normalize, DatasetSplit, NormalizationMode,
    NormalizationSpec, RoadNetworkSpec, SpeedSeries, WindowSample, DEFAULT_FRACTIONS, DEFAULT_WINDOW, HORIZON,
    MINUTES_PER_DAY,
};
pub use synth::{generate_synthetic, write_synthetic, SynthConfig, Topology, FREE_FLOW_MPH, LINK_SPACING_MILES, MAX_SPEED_MPH};
