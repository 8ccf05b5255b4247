use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxEpochs,
    EarlyStop,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::MaxEpochs => "max_epochs",
            StopReason::EarlyStop => "early_stop",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
    pub seconds: f64,
}

/// Per-epoch losses. `initial_val_mse` is the validation loss of the
/// untrained model (epoch 0); epochs are numbered from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub initial_val_mse: f64,
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stop_reason: StopReason,
}

impl TrainLog {
    pub(crate) fn new(initial_val_mse: f64) -> Self {
        Self {
            initial_val_mse,
            epochs: Vec::new(),
            best_epoch: 0,
            stop_reason: StopReason::MaxEpochs,
        }
    }

    pub(crate) fn push(&mut self, record: EpochRecord) {
        self.epochs.push(record);
    }

    pub(crate) fn finish(&mut self, best_epoch: usize, reason: StopReason) {
        self.best_epoch = best_epoch;
        self.stop_reason = reason;
    }

    pub fn best_val_mse(&self) -> Option<f64> {
        self.epochs.iter().map(|e| e.val_mse).min_by(f64::total_cmp)
    }

    pub fn final_val_mse(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.val_mse)
    }

    /// Deterministic part of the log: `epoch,train_mse,val_mse`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_mse,val_mse\n");
        for e in &self.epochs {
            out.push_str(&format!("{},{:e},{:e}\n", e.epoch, e.train_mse, e.val_mse));
        }
        out
    }

    /// Wall-clock sidecar: `epoch,seconds`.
    pub fn timing_csv(&self) -> String {
        let mut out = String::from("epoch,seconds\n");
        for e in &self.epochs {
            out.push_str(&format!("{},{:.6}\n", e.epoch, e.seconds));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn write_timing_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.timing_csv()).map_err(|e| Error::io(path, e))
    }

    /// Parses the output of [`TrainLog::to_csv`] into `(epoch, train_mse, val_mse)` rows.
    pub fn parse_csv(text: &str) -> Result<Vec<(usize, f64, f64)>> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "epoch,train_mse,val_mse")) => {}
            _ => {
                return Err(Error::MalformedCsv {
                    line: 1,
                    reason: "missing train log header".into(),
                })
            }
        }
        lines
            .map(|(idx, line)| {
                let bad = || Error::MalformedCsv {
                    line: idx + 1,
                    reason: format!("bad train log row {line:?}"),
                };
                let cells: Vec<&str> = line.split(',').collect();
                match cells.as_slice() {
                    [e, t, v] => Ok((
                        e.parse().map_err(|_| bad())?,
                        t.parse().map_err(|_| bad())?,
                        v.parse().map_err(|_| bad())?,
                    )),
                    _ => Err(bad()),
                }
            })
            .collect()
    }
}
