//! Link-speed forecasting on a geographic and long-term temporal (GLT) graph.
//!
//! The pipeline is:
//!
//! 1. [`data`]: load or synthesize a speed history, split it chronologically
//!    and cut supervised windows.
//! 2. [`graph`]: build the k-hop geographic masks, the long-term temporal
//!    similarity mask from pooled daily profiles, the free-flow reachable
//!    filter, and their combination into the per-hop ultimate masks.
//! 3. [`model`]: a masked graph convolution per hop feeding an LSTM whose
//!    cell state is mixed across neighbouring links.
//! 4. [`train`]: analytic gradients, RMSProp, mini-batch training with early
//!    stopping, and a finite-difference gradient checker.
//! 5. [`eval`]: RMSE / MAPE / MAE, reference predictors and trace export.

pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
pub mod model;
pub mod train;

pub use error::{Error, Result};
