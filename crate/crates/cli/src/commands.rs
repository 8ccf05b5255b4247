use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use glt_core::data::{
    chronological_split, generate_synthetic, impute_missing, load_road_network, load_speed_csv, make_windows, normalize,
    write_synthetic, DatasetSplit, NormalizationSpec, RoadNetworkSpec, SpeedSeries, WindowSample, HORIZON,
};
use glt_core::eval::{evaluate, evaluate_baseline, export_trace, BaselineKind, MetricsReport};
use glt_core::graph::{build_graph, GltGraph};
use glt_core::model::{init_params, read_checkpoint, write_checkpoint, GltModel};
use glt_core::train::{train, TrainLog};

use crate::config::RunConfig;
use crate::error::{in_file, io, CliError, CliResult};

pub const CHECKPOINT_FILE: &str = "checkpoint.txt";
pub const LOG_FILE: &str = "train_log.csv";
pub const TIMING_FILE: &str = "train_log.timing.csv";
pub const GRAPH_DIR: &str = "graph";

pub struct Inputs {
    pub series: SpeedSeries,
    pub network: RoadNetworkSpec,
}

/// Reads the configured CSVs, or synthesizes data when no speed file is set.
/// Zero readings are imputed before anything else sees the series.
pub fn load_inputs(cfg: &RunConfig) -> CliResult<Inputs> {
    let (series, network) = match (&cfg.paths.speed, &cfg.paths.adjacency, &cfg.paths.distance) {
        (Some(speed), Some(adj), Some(dist)) => {
            for p in [speed, adj, dist] {
                if !p.exists() {
                    return Err(io(p, std::io::Error::new(std::io::ErrorKind::NotFound, "file not found")));
                }
            }
            let series = load_speed_csv(speed, cfg.data.interval_minutes).map_err(in_file(speed))?;
            let network = load_road_network(adj, dist).map_err(in_file(adj))?;
            (series, network)
        }
        (None, _, _) => generate_synthetic(&cfg.synth_config()?)?,
        _ => return Err(CliError::Config("a speed CSV needs both adjacency and distance CSVs".into())),
    };
    if series.num_links() != network.num_links() {
        return Err(CliError::Config(format!(
            "speed data has {} links but the network has {}",
            series.num_links(),
            network.num_links()
        )));
    }
    Ok(Inputs {
        series: impute_missing(&series),
        network,
    })
}

/// Everything training and evaluation share: the split, the normalization
/// and normalized train/validation windows.
pub struct Prepared {
    pub series: SpeedSeries,
    pub network: RoadNetworkSpec,
    pub split: DatasetSplit,
    pub normalization: NormalizationSpec,
    pub train_windows: Vec<WindowSample>,
    pub validation_windows: Vec<WindowSample>,
}

pub fn prepare(cfg: &RunConfig) -> CliResult<Prepared> {
    cfg.validate()?;
    let Inputs { series, network } = load_inputs(cfg)?;
    let split = chronological_split(&series, cfg.fractions())?;
    let normalization = cfg.normalization()?;
    let train_windows = make_windows(&normalize(&split.train, &normalization)?, cfg.data.window, HORIZON)?;
    let validation_windows = make_windows(&normalize(&split.validation, &normalization)?, cfg.data.window, HORIZON)?;
    Ok(Prepared {
        series,
        network,
        split,
        normalization,
        train_windows,
        validation_windows,
    })
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))
}

pub struct SynthSummary {
    pub dir: PathBuf,
    pub links: usize,
    pub steps: usize,
}

impl fmt::Display for SynthSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "wrote {} links x {} steps to {}", self.links, self.steps, self.dir.display())
    }
}

/// Writes a synthetic dataset (`speed.csv`, `adjacency.csv`, `distance.csv`,
/// `manifest.txt`) into the output directory.
pub fn cmd_synth(cfg: &RunConfig) -> CliResult<SynthSummary> {
    cfg.validate()?;
    let synth = cfg.synth_config()?;
    let (series, network) = generate_synthetic(&synth)?;
    let dir = cfg.paths.out_dir.clone();
    ensure_dir(&dir)?;
    write_synthetic(&dir, &synth, &series, &network)?;
    Ok(SynthSummary {
        dir,
        links: series.num_links(),
        steps: series.len(),
    })
}

pub struct GraphSummary {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl fmt::Display for GraphSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "wrote {} mask files and manifest.txt to {}", self.files.len(), self.dir.display())
    }
}

/// Builds every mask from the training split and writes them under `graph/`.
pub fn cmd_build_graph(cfg: &RunConfig) -> CliResult<GraphSummary> {
    cfg.validate()?;
    let Inputs { series, network } = load_inputs(cfg)?;
    let split = chronological_split(&series, cfg.fractions())?;
    let graph = build_graph(&network, &split.train, &cfg.graph_config())?;
    let dir = cfg.paths.out_dir.join(GRAPH_DIR);
    let files = graph.write(&dir)?;
    Ok(GraphSummary { dir, files })
}

/// Builds the graph for `gamma`, initializes with `seed` and trains.
pub fn train_model(cfg: &RunConfig, prepared: &Prepared, gamma: usize, seed: u64) -> CliResult<(GltModel, TrainLog, GltGraph)> {
    let mut graph_cfg = cfg.graph_config();
    graph_cfg.gamma = gamma;
    let graph = build_graph(&prepared.network, &prepared.split.train, &graph_cfg)?;
    let model = init_params(graph.ultimate.clone(), seed, cfg.train.init_scale)?;
    let mut train_cfg = cfg.train_config();
    train_cfg.seed = seed;
    let (best, log) = train(model, &prepared.train_windows, &prepared.validation_windows, &train_cfg)?;
    Ok((best, log, graph))
}

pub(crate) fn write_run(dir: &Path, model: &GltModel, log: &TrainLog) -> CliResult<()> {
    ensure_dir(dir)?;
    write_checkpoint(model, dir.join(CHECKPOINT_FILE))?;
    log.write_csv(dir.join(LOG_FILE))?;
    log.write_timing_csv(dir.join(TIMING_FILE))?;
    Ok(())
}

pub struct TrainSummary {
    pub dir: PathBuf,
    pub log: TrainLog,
}

impl fmt::Display for TrainSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let log = &self.log;
        write!(
            f,
            "epochs={} stop={} best_epoch={} initial_val_mse={:e} best_val_mse={:e} -> {}",
            log.epochs.len(),
            log.stop_reason,
            log.best_epoch,
            log.initial_val_mse,
            log.best_val_mse().unwrap_or(f64::NAN),
            self.dir.join(CHECKPOINT_FILE).display()
        )
    }
}

/// Trains with the configured gamma and seed; writes the best checkpoint,
/// the loss log and the timing sidecar.
pub fn cmd_train(cfg: &RunConfig) -> CliResult<TrainSummary> {
    let prepared = prepare(cfg)?;
    let (model, log, _) = train_model(cfg, &prepared, cfg.graph.gamma, cfg.seed)?;
    let dir = cfg.paths.out_dir.clone();
    write_run(&dir, &model, &log)?;
    Ok(TrainSummary { dir, log })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalSplit {
    Validation,
    #[default]
    Test,
}

impl std::str::FromStr for EvalSplit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "validation" => Ok(Self::Validation),
            "test" => Ok(Self::Test),
            other => Err(format!("unknown split {other:?} (expected validation or test)")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvaluateOptions {
    /// Defaults to the checkpoint in the output directory.
    pub checkpoint: Option<PathBuf>,
    pub split: EvalSplit,
    /// Also write `key=value` lines here.
    pub kv_out: Option<PathBuf>,
    pub baselines: bool,
}

pub struct EvaluateSummary {
    pub model: MetricsReport,
    pub persistence: Option<MetricsReport>,
    pub historical_mean: Option<MetricsReport>,
}

fn load_model(cfg: &RunConfig, checkpoint: Option<&PathBuf>, links: usize) -> CliResult<GltModel> {
    let path = checkpoint.cloned().unwrap_or_else(|| cfg.paths.out_dir.join(CHECKPOINT_FILE));
    let model = read_checkpoint(&path).map_err(in_file(&path))?;
    if model.num_links() != links {
        return Err(CliError::Config(format!(
            "{} holds a model for {} links, data has {links}",
            path.display(),
            model.num_links()
        )));
    }
    Ok(model)
}

/// Metrics in mph of a checkpoint on the test (or validation) split.
pub fn cmd_evaluate(cfg: &RunConfig, options: &EvaluateOptions) -> CliResult<EvaluateSummary> {
    let prepared = prepare(cfg)?;
    let model = load_model(cfg, options.checkpoint.as_ref(), prepared.series.num_links())?;
    let source = match options.split {
        EvalSplit::Validation => &prepared.split.validation,
        EvalSplit::Test => &prepared.split.test,
    };
    let windows = make_windows(source, cfg.data.window, HORIZON)?;
    let report = evaluate(&model, &windows, &prepared.normalization)?;
    let (persistence, historical_mean) = if options.baselines {
        let train = &prepared.split.train;
        (
            Some(evaluate_baseline(BaselineKind::Persistence, train, source, &windows)?),
            Some(evaluate_baseline(BaselineKind::HistoricalMean, train, source, &windows)?),
        )
    } else {
        (None, None)
    };
    if let Some(path) = &options.kv_out {
        fs::write(path, report.to_key_values()).map_err(|e| io(path, e))?;
    }
    Ok(EvaluateSummary {
        model: report,
        persistence,
        historical_mean,
    })
}

#[derive(Debug, Clone, Default)]
pub struct PredictOptions {
    pub checkpoint: Option<PathBuf>,
    pub link: usize,
    pub day: usize,
    /// Defaults to `trace_link<L>_day<D>.csv` in the output directory.
    pub output: Option<PathBuf>,
}

pub struct PredictSummary {
    pub path: PathBuf,
    pub rows: usize,
}

impl fmt::Display for PredictSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "wrote {} rows to {}", self.rows, self.path.display())
    }
}

/// Writes the one-day prediction trace of one link over the full series.
pub fn cmd_predict(cfg: &RunConfig, options: &PredictOptions) -> CliResult<PredictSummary> {
    cfg.validate()?;
    let Inputs { series, .. } = load_inputs(cfg)?;
    let model = load_model(cfg, options.checkpoint.as_ref(), series.num_links())?;
    let path = options.output.clone().unwrap_or_else(|| {
        cfg.paths
            .out_dir
            .join(format!("trace_link{}_day{}.csv", options.link, options.day))
    });
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    let points = export_trace(
        &model,
        &series,
        &cfg.normalization()?,
        cfg.data.window,
        options.link,
        options.day,
        &path,
    )?;
    Ok(PredictSummary {
        path,
        rows: points.len(),
    })
}
