use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use glt_cli::{
    cmd_build_graph, cmd_evaluate, cmd_predict, cmd_sweep_gamma, cmd_synth, cmd_train, CliResult, EvalSplit,
    EvaluateOptions, Overrides, PredictOptions, RunConfig,
};

#[derive(Parser)]
#[command(name = "glt", version, about = "Graph-masked recurrent traffic speed forecasting")]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Only errors and requested reports are printed.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset into the output directory.
    Synth,
    /// Build every mask and write them under <out-dir>/graph.
    BuildGraph,
    /// Train and write checkpoint.txt and train_log.csv.
    Train,
    /// Print rmse/mape/mae in mph for a checkpoint.
    Evaluate {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value = "test")]
        split: EvalSplit,
        /// Also write key=value lines to this file.
        #[arg(long)]
        kv_out: Option<PathBuf>,
        /// Also report persistence and historical-mean baselines.
        #[arg(long)]
        baselines: bool,
    },
    /// Write a one-day trace of predicted and observed speed for one link.
    Predict {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        link: usize,
        #[arg(long)]
        day: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Retrain per gamma and seed, writing a validation-metrics table.
    SweepGamma {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
        gammas: Vec<usize>,
        /// Seeds per gamma, counting up from --seed.
        #[arg(long, default_value_t = 2)]
        repeats: usize,
    },
}

fn resolve(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(&cli.overrides);
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.paths.out_dir = dir.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = resolve(&cli)?;
    let say = |line: String| {
        if !cli.quiet {
            println!("{line}");
        }
    };
    match cli.command {
        Command::Synth => say(cmd_synth(&cfg)?.to_string()),
        Command::BuildGraph => say(cmd_build_graph(&cfg)?.to_string()),
        Command::Train => say(cmd_train(&cfg)?.to_string()),
        Command::Evaluate {
            checkpoint,
            split,
            kv_out,
            baselines,
        } => {
            let summary = cmd_evaluate(
                &cfg,
                &EvaluateOptions {
                    checkpoint,
                    split,
                    kv_out,
                    baselines,
                },
            )?;
            println!("{}", summary.model);
            if let Some(p) = summary.persistence {
                println!("persistence {p}");
            }
            if let Some(h) = summary.historical_mean {
                println!("historical_mean {h}");
            }
        }
        Command::Predict {
            checkpoint,
            link,
            day,
            output,
        } => say(
            cmd_predict(
                &cfg,
                &PredictOptions {
                    checkpoint,
                    link,
                    day,
                    output,
                },
            )?
            .to_string(),
        ),
        Command::SweepGamma { gammas, repeats } => {
            let summary = cmd_sweep_gamma(&cfg, &gammas, repeats)?;
            for (gamma, rmse, mape, mae) in summary.table.means() {
                say(format!("gamma={gamma} mean_val_rmse_mph={rmse:.4} mean_val_mape_pct={mape:.4} mean_val_mae_mph={mae:.4}"));
            }
            say(format!("wrote {} rows to {}", summary.table.rows.len(), summary.path.display()));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.class().exit_code())
        }
    }
}
