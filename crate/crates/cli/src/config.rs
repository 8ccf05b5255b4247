//! Run configuration: a TOML file with `[paths]`, `[synth]`, `[graph]`,
//! `[data]` and `[train]` sections plus a top-level `seed`. Every key can be
//! overridden by the command-line flag of the same name (underscores become
//! hyphens; `synth.seed` is `--synth-seed`).

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use glt_core::data::{NormalizationMode, NormalizationSpec, SynthConfig, Topology, HORIZON};
use glt_core::graph::{FreeFlowParams, GraphConfig};
use glt_core::model::DEFAULT_INIT_SCALE;
use glt_core::train::TrainConfig;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    /// Speed CSV. When absent, data is synthesized in memory from `[synth]`.
    pub speed: Option<PathBuf>,
    pub adjacency: Option<PathBuf>,
    pub distance: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for PathsSection {
    fn default() -> Self {
        Self {
            speed: None,
            adjacency: None,
            distance: None,
            out_dir: PathBuf::from("runs/default"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub links: usize,
    pub days: usize,
    pub topology: String,
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            links: 20,
            days: 7,
            topology: "chain".into(),
            noise_scale: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSection {
    pub hops: usize,
    pub gamma: usize,
    pub delta_t_minutes: f64,
    pub intervals: u32,
    pub free_flow_mph: f64,
    pub symmetrize: bool,
}

impl Default for GraphSection {
    fn default() -> Self {
        let g = GraphConfig::default();
        Self {
            hops: g.hops,
            gamma: g.gamma,
            delta_t_minutes: g.free_flow.delta_t_minutes,
            intervals: g.free_flow.intervals,
            free_flow_mph: g.free_flow.free_flow_mph,
            symmetrize: g.symmetrize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub interval_minutes: u32,
    pub window: usize,
    pub horizon: usize,
    pub normalization: String,
    pub scale: f64,
    pub train_fraction: f64,
    pub validation_fraction: f64,
    pub test_fraction: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        let (a, b, c) = glt_core::data::DEFAULT_FRACTIONS;
        Self {
            interval_minutes: 5,
            window: glt_core::data::DEFAULT_WINDOW,
            horizon: HORIZON,
            normalization: "max_scale".into(),
            scale: NormalizationSpec::default().scale,
            train_fraction: a,
            validation_fraction: b,
            test_fraction: c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub rmsprop_alpha: f64,
    pub rmsprop_epsilon: f64,
    pub early_stop_patience: usize,
    pub clip_norm: Option<f64>,
    pub init_scale: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            max_epochs: t.max_epochs,
            rmsprop_alpha: t.rmsprop_alpha,
            rmsprop_epsilon: t.rmsprop_epsilon,
            early_stop_patience: t.early_stop_patience,
            clip_norm: t.clip_norm,
            init_scale: DEFAULT_INIT_SCALE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seeds parameter initialization and batch shuffling.
    pub seed: u64,
    pub paths: PathsSection,
    pub synth: SynthSection,
    pub graph: GraphSection,
    pub data: DataSection,
    pub train: TrainSection,
}

/// Command-line overrides, one per configuration key.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub speed: Option<PathBuf>,
    #[arg(long, global = true)]
    pub adjacency: Option<PathBuf>,
    #[arg(long, global = true)]
    pub distance: Option<PathBuf>,

    #[arg(long, global = true)]
    pub links: Option<usize>,
    #[arg(long, global = true)]
    pub days: Option<usize>,
    #[arg(long, global = true)]
    pub topology: Option<String>,
    #[arg(long, global = true)]
    pub noise_scale: Option<f64>,
    #[arg(long, global = true)]
    pub synth_seed: Option<u64>,

    #[arg(long, global = true)]
    pub hops: Option<usize>,
    #[arg(long, global = true)]
    pub gamma: Option<usize>,
    #[arg(long, global = true)]
    pub delta_t_minutes: Option<f64>,
    #[arg(long, global = true)]
    pub intervals: Option<u32>,
    #[arg(long, global = true)]
    pub free_flow_mph: Option<f64>,
    #[arg(long, global = true)]
    pub symmetrize: Option<bool>,

    #[arg(long, global = true)]
    pub interval_minutes: Option<u32>,
    #[arg(long, global = true)]
    pub window: Option<usize>,
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    #[arg(long, global = true)]
    pub normalization: Option<String>,
    #[arg(long, global = true)]
    pub scale: Option<f64>,
    #[arg(long, global = true)]
    pub train_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub validation_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub test_fraction: Option<f64>,

    #[arg(long, global = true)]
    pub learning_rate: Option<f64>,
    #[arg(long, global = true)]
    pub batch_size: Option<usize>,
    #[arg(long, global = true)]
    pub max_epochs: Option<usize>,
    #[arg(long, global = true)]
    pub rmsprop_alpha: Option<f64>,
    #[arg(long, global = true)]
    pub rmsprop_epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub early_stop_patience: Option<usize>,
    #[arg(long, global = true)]
    pub clip_norm: Option<f64>,
    #[arg(long, global = true)]
    pub init_scale: Option<f64>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::ConfigParse {
            path: origin.to_path_buf(),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> CliResult<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| crate::error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text, path)?;
        // Relative data paths are taken relative to the config file.
        if let Some(base) = path.parent() {
            for p in [&mut cfg.paths.speed, &mut cfg.paths.adjacency, &mut cfg.paths.distance]
                .into_iter()
                .flatten()
            {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        let Overrides {
            speed,
            adjacency,
            distance,
            links,
            days,
            topology,
            noise_scale,
            synth_seed,
            hops,
            gamma,
            delta_t_minutes,
            intervals,
            free_flow_mph,
            symmetrize,
            interval_minutes,
            window,
            horizon,
            normalization,
            scale,
            train_fraction,
            validation_fraction,
            test_fraction,
            learning_rate,
            batch_size,
            max_epochs,
            rmsprop_alpha,
            rmsprop_epsilon,
            early_stop_patience,
            clip_norm,
            init_scale,
        } = o.clone();
        if speed.is_some() {
            self.paths.speed = speed;
        }
        if adjacency.is_some() {
            self.paths.adjacency = adjacency;
        }
        if distance.is_some() {
            self.paths.distance = distance;
        }
        set(&mut self.synth.links, links);
        set(&mut self.synth.days, days);
        set(&mut self.synth.topology, topology);
        set(&mut self.synth.noise_scale, noise_scale);
        set(&mut self.synth.seed, synth_seed);
        set(&mut self.graph.hops, hops);
        set(&mut self.graph.gamma, gamma);
        set(&mut self.graph.delta_t_minutes, delta_t_minutes);
        set(&mut self.graph.intervals, intervals);
        set(&mut self.graph.free_flow_mph, free_flow_mph);
        set(&mut self.graph.symmetrize, symmetrize);
        set(&mut self.data.interval_minutes, interval_minutes);
        set(&mut self.data.window, window);
        set(&mut self.data.horizon, horizon);
        set(&mut self.data.normalization, normalization);
        set(&mut self.data.scale, scale);
        set(&mut self.data.train_fraction, train_fraction);
        set(&mut self.data.validation_fraction, validation_fraction);
        set(&mut self.data.test_fraction, test_fraction);
        set(&mut self.train.learning_rate, learning_rate);
        set(&mut self.train.batch_size, batch_size);
        set(&mut self.train.max_epochs, max_epochs);
        set(&mut self.train.rmsprop_alpha, rmsprop_alpha);
        set(&mut self.train.rmsprop_epsilon, rmsprop_epsilon);
        set(&mut self.train.early_stop_patience, early_stop_patience);
        if clip_norm.is_some() {
            self.train.clip_norm = clip_norm;
        }
        set(&mut self.train.init_scale, init_scale);
    }

    /// Checks everything that can be checked without touching data.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.data.horizon != HORIZON {
            return bad(format!("horizon must be {HORIZON}, got {}", self.data.horizon));
        }
        if self.graph.hops < 1 {
            return bad("hops must be at least 1".into());
        }
        if self.graph.gamma < 1 {
            return bad("gamma must be at least 1".into());
        }
        if self.data.window < 1 {
            return bad("window must be at least 1".into());
        }
        if !(self.train.init_scale.is_finite() && self.train.init_scale >= 0.0) {
            return bad(format!("init_scale {}", self.train.init_scale));
        }
        if self.paths.speed.is_some() && (self.paths.adjacency.is_none() || self.paths.distance.is_none()) {
            return bad("a speed CSV needs both adjacency and distance CSVs".into());
        }
        self.topology()?;
        self.normalization()?.validate()?;
        self.graph_config().free_flow.validate()?;
        self.train_config().validate()?;
        Ok(())
    }

    pub fn topology(&self) -> CliResult<Topology> {
        Ok(self.synth.topology.parse()?)
    }

    pub fn normalization(&self) -> CliResult<NormalizationSpec> {
        let mode: NormalizationMode = self.data.normalization.parse()?;
        Ok(NormalizationSpec::new(mode, self.data.scale)?)
    }

    pub fn fractions(&self) -> (f64, f64, f64) {
        (self.data.train_fraction, self.data.validation_fraction, self.data.test_fraction)
    }

    pub fn synth_config(&self) -> CliResult<SynthConfig> {
        let mut cfg = SynthConfig::new(self.synth.links, self.synth.days, self.synth.seed, self.topology()?);
        cfg.interval_minutes = self.data.interval_minutes;
        cfg.noise_scale = self.synth.noise_scale;
        Ok(cfg)
    }

    pub fn graph_config(&self) -> GraphConfig {
        GraphConfig {
            hops: self.graph.hops,
            gamma: self.graph.gamma,
            free_flow: FreeFlowParams {
                free_flow_mph: self.graph.free_flow_mph,
                delta_t_minutes: self.graph.delta_t_minutes,
                intervals: self.graph.intervals,
            },
            symmetrize: self.graph.symmetrize,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.train.learning_rate,
            batch_size: self.train.batch_size,
            max_epochs: self.train.max_epochs,
            rmsprop_alpha: self.train.rmsprop_alpha,
            rmsprop_epsilon: self.train.rmsprop_epsilon,
            early_stop_patience: self.train.early_stop_patience,
            seed: self.seed,
            clip_norm: self.train.clip_norm,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::from_toml_str("", Path::new("x.toml")).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.train_config(), TrainConfig { seed: 0, ..TrainConfig::default() });
        assert_eq!(cfg.graph_config(), GraphConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn sections_parse_and_flags_override() {
        let text = "seed = 4\n[graph]\ngamma = 5\n[train]\nlearning_rate = 0.001\nclip_norm = 2.0\n";
        let mut cfg = RunConfig::from_toml_str(text, Path::new("x.toml")).unwrap();
        assert_eq!((cfg.seed, cfg.graph.gamma, cfg.train.clip_norm), (4, 5, Some(2.0)));
        cfg.apply(&Overrides {
            gamma: Some(2),
            max_epochs: Some(1),
            ..Overrides::default()
        });
        assert_eq!((cfg.graph.gamma, cfg.train.max_epochs), (2, 1));
        assert_eq!(cfg.train.learning_rate, 0.001);
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        let err = RunConfig::from_toml_str("[graph]\ngama = 3\n", Path::new("x.toml")).unwrap_err();
        assert!(matches!(err, CliError::ConfigParse { .. }));
        let mut cfg = RunConfig::default();
        cfg.data.horizon = 2;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.data.normalization = "zscore".into();
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.paths.speed = Some("speed.csv".into());
        assert!(cfg.validate().is_err());
    }
}
