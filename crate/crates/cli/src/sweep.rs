//! Gamma sweep: one retrained model per (gamma, seed) cell, scored on the
//! validation split.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use glt_core::data::{make_windows, HORIZON};
use glt_core::eval::evaluate;

use crate::commands::{prepare, train_model, write_run};
use crate::config::RunConfig;
use crate::error::{io, CliError, CliResult};

pub const SWEEP_FILE: &str = "sweep_gamma.csv";
pub const SWEEP_HEADER: &str = "gamma,seed,val_rmse_mph,val_mape_pct,val_mae_mph,best_epoch";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub gamma: usize,
    pub seed: u64,
    pub val_rmse_mph: f64,
    pub val_mape_pct: f64,
    pub val_mae_mph: f64,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn render(&self) -> String {
        let mut out = format!("{SWEEP_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.gamma, r.seed, r.val_rmse_mph, r.val_mape_pct, r.val_mae_mph, r.best_epoch
            );
        }
        out
    }

    pub fn parse(text: &str, origin: &Path) -> CliResult<Self> {
        let fail = |line: usize, reason: String| CliError::Table {
            path: origin.to_path_buf(),
            line,
            reason,
        };
        let mut lines = text.lines();
        if lines.next() != Some(SWEEP_HEADER) {
            return Err(fail(1, format!("expected header {SWEEP_HEADER:?}")));
        }
        let mut rows = Vec::new();
        for (idx, line) in lines.enumerate() {
            let n = idx + 2;
            let cells: Vec<&str> = line.split(',').collect();
            let [g, s, rmse, mape, mae, best] = cells.as_slice() else {
                return Err(fail(n, format!("expected 6 fields, found {}", cells.len())));
            };
            let num = |v: &str| v.parse::<f64>().map_err(|_| fail(n, format!("bad number {v:?}")));
            let int = |v: &str| v.parse::<u64>().map_err(|_| fail(n, format!("bad integer {v:?}")));
            rows.push(SweepRow {
                gamma: int(g)? as usize,
                seed: int(s)?,
                val_rmse_mph: num(rmse)?,
                val_mape_pct: num(mape)?,
                val_mae_mph: num(mae)?,
                best_epoch: int(best)? as usize,
            });
        }
        Ok(Self { rows })
    }

    pub fn read(path: impl AsRef<Path>) -> CliResult<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| io(path, e))?;
        Self::parse(&text, path)
    }

    /// Mean validation (rmse, mape, mae) per gamma, in gamma order.
    pub fn means(&self) -> Vec<(usize, f64, f64, f64)> {
        let mut out: Vec<(usize, f64, f64, f64)> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for r in &self.rows {
            match out.last_mut() {
                Some(last) if last.0 == r.gamma => {
                    last.1 += r.val_rmse_mph;
                    last.2 += r.val_mape_pct;
                    last.3 += r.val_mae_mph;
                    *counts.last_mut().expect("paired with out") += 1;
                }
                _ => {
                    out.push((r.gamma, r.val_rmse_mph, r.val_mape_pct, r.val_mae_mph));
                    counts.push(1);
                }
            }
        }
        for (m, c) in out.iter_mut().zip(counts) {
            let c = c as f64;
            m.1 /= c;
            m.2 /= c;
            m.3 /= c;
        }
        out
    }
}

pub struct SweepSummary {
    pub table: SweepTable,
    pub path: PathBuf,
}

/// Cell directory for one (gamma, seed) pair.
pub fn cell_dir(out_dir: &Path, gamma: usize, seed: u64) -> PathBuf {
    out_dir.join("sweep").join(format!("gamma{gamma}_seed{seed}"))
}

/// Retrains once per (gamma, seed) with seeds `seed, seed + 1, ...`.
/// Cells run concurrently; rows come back sorted by (gamma, seed).
pub fn cmd_sweep_gamma(cfg: &RunConfig, gammas: &[usize], repeats: usize) -> CliResult<SweepSummary> {
    if gammas.is_empty() {
        return Err(CliError::Config("gamma list is empty".into()));
    }
    if repeats == 0 {
        return Err(CliError::Config("repeats must be at least 1".into()));
    }
    let prepared = prepare(cfg)?;
    let validation = make_windows(&prepared.split.validation, cfg.data.window, HORIZON)?;
    let mut cells: Vec<(usize, u64)> = gammas
        .iter()
        .flat_map(|&g| (0..repeats as u64).map(move |r| (g, cfg.seed + r)))
        .collect();
    cells.sort_unstable();
    cells.dedup();

    let rows = cells
        .par_iter()
        .map(|&(gamma, seed)| {
            let (model, log, _) = train_model(cfg, &prepared, gamma, seed)?;
            write_run(&cell_dir(&cfg.paths.out_dir, gamma, seed), &model, &log)?;
            let m = evaluate(&model, &validation, &prepared.normalization)?;
            Ok(SweepRow {
                gamma,
                seed,
                val_rmse_mph: m.rmse,
                val_mape_pct: m.mape,
                val_mae_mph: m.mae,
                best_epoch: log.best_epoch,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let table = SweepTable { rows };
    fs::create_dir_all(&cfg.paths.out_dir).map_err(|e| io(&cfg.paths.out_dir, e))?;
    let path = cfg.paths.out_dir.join(SWEEP_FILE);
    fs::write(&path, table.render()).map_err(|e| io(&path, e))?;
    Ok(SweepSummary { table, path })
}
