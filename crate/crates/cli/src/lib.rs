//! Command implementations behind the `glt` binary. Each `cmd_*` function
//! takes a resolved [`RunConfig`] and returns a summary; printing and exit
//! codes are left to the binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod sweep;

pub use commands::{
    cmd_build_graph, cmd_evaluate, cmd_predict, cmd_synth, cmd_train, load_inputs, prepare, train_model, EvalSplit,
    EvaluateOptions, EvaluateSummary, PredictOptions, Prepared, CHECKPOINT_FILE, GRAPH_DIR, LOG_FILE, TIMING_FILE,
};
pub use config::{Overrides, RunConfig};
pub use error::{CliError, CliResult, ErrorClass};
pub use sweep::{cmd_sweep_gamma, SweepRow, SweepTable, SWEEP_FILE};
