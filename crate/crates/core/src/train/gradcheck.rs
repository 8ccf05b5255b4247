use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{backward, batch_loss, GradientSet};
use crate::data::WindowSample;
use crate::error::{Error, Result};
use crate::model::GltModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckOptions {
    /// Central-difference half step.
    pub step: f64,
    /// Maximum accepted relative error.
    pub tolerance: f64,
    /// Relative error is `|a − n| / max(|a|, |n|, floor)`; the floor keeps
    /// round-off on vanishing gradients from dominating.
    pub floor: f64,
    /// Check at most this many entries per block (all when `None`).
    pub max_per_block: Option<usize>,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self {
            step: 1e-5,
            tolerance: 1e-4,
            floor: 1e-6,
            max_per_block: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub name: String,
    pub checked: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    /// `(entry, analytic, numeric, relative error)` for entries over tolerance.
    pub flagged: Vec<(usize, f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheckReport {
    pub blocks: Vec<BlockReport>,
    pub tolerance: f64,
}

impl GradientCheckReport {
    pub fn passed(&self) -> bool {
        self.blocks.iter().all(|b| b.flagged.is_empty())
    }

    pub fn max_rel_error(&self) -> f64 {
        self.blocks.iter().map(|b| b.max_rel_error).fold(0.0, f64::max)
    }

    pub fn checked(&self) -> usize {
        self.blocks.iter().map(|b| b.checked).sum()
    }
}

/// Compares [`backward`] against central differences of the batch loss.
pub fn gradient_check(model: &GltModel, batch: &[WindowSample], options: &GradCheckOptions) -> Result<GradientCheckReport> {
    let (_, analytic) = backward(model, batch)?;
    gradient_check_against(model, batch, &analytic, options)
}

/// Compares a supplied gradient set against central differences.
pub fn gradient_check_against(
    model: &GltModel,
    batch: &[WindowSample],
    analytic: &GradientSet,
    options: &GradCheckOptions,
) -> Result<GradientCheckReport> {
    if !(options.step > 0.0 && options.step.is_finite()) {
        return Err(Error::BadParams(format!("finite-difference step {}", options.step)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut probe = model.clone();
    let mut blocks = Vec::new();
    for (b, grad_block) in analytic.blocks().iter().enumerate() {
        let len = grad_block.values.len();
        let entries: Vec<usize> = match options.max_per_block {
            Some(m) if m < len => {
                let mut picked = sample(&mut rng, len, m).into_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..len).collect(),
        };
        let mut report = BlockReport {
            name: grad_block.name.clone(),
            checked: entries.len(),
            max_rel_error: 0.0,
            max_abs_error: 0.0,
            flagged: Vec::new(),
        };
        for i in entries {
            let original = probe.params().blocks()[b].values[i];
            probe.params_mut().blocks_mut()[b].values[i] = original + options.step;
            let plus = batch_loss(&probe, batch)?;
            probe.params_mut().blocks_mut()[b].values[i] = original - options.step;
            let minus = batch_loss(&probe, batch)?;
            probe.params_mut().blocks_mut()[b].values[i] = original;

            let numeric = (plus - minus) / (2.0 * options.step);
            let a = grad_block.values[i];
            if !numeric.is_finite() || !a.is_finite() {
                return Err(Error::NonFinite(format!("gradient check of {} entry {i}", grad_block.name)));
            }
            let abs = (a - numeric).abs();
            let rel = abs / a.abs().max(numeric.abs()).max(options.floor);
            report.max_abs_error = report.max_abs_error.max(abs);
            report.max_rel_error = report.max_rel_error.max(rel);
            if rel > options.tolerance {
                report.flagged.push((i, a, numeric, rel));
            }
        }
        blocks.push(report);
    }
    Ok(GradientCheckReport {
        blocks,
        tolerance: options.tolerance,
    })
}
