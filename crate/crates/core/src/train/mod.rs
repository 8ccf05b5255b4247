//! Objective, analytic gradients, optimizer and the training loop.

mod gradcheck;
mod log;
mod rmsprop;

pub use gradcheck::{gradient_check, gradient_check_against, BlockReport, GradCheckOptions, GradientCheckReport};
pub use log::{EpochRecord, StopReason, TrainLog};
pub use rmsprop::{rmsprop_update, RmsPropState};

use std::time::Instant;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::WindowSample;
use crate::error::{Error, Result};
use crate::model::{Gate, GltModel, Params};

/// Gradients share the parameter layout.
pub type GradientSet = Params;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub rmsprop_alpha: f64,
    pub rmsprop_epsilon: f64,
    pub early_stop_patience: usize,
    pub seed: u64,
    /// Rescale the batch gradient to at most this Euclidean norm.
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-5,
            batch_size: 10,
            max_epochs: 200,
            rmsprop_alpha: 0.99,
            rmsprop_epsilon: 1e-8,
            early_stop_patience: 10,
            seed: 0,
            clip_norm: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate.is_finite()
            && self.learning_rate > 0.0
            && self.rmsprop_alpha > 0.0
            && self.rmsprop_alpha < 1.0
            && self.rmsprop_epsilon.is_finite()
            && self.rmsprop_epsilon > 0.0
            && self.batch_size >= 1
            && self.early_stop_patience >= 1
            && self.clip_norm.is_none_or(|c| c.is_finite() && c > 0.0);
        if !ok {
            return Err(Error::BadParams(format!("training configuration {self:?}")));
        }
        Ok(())
    }
}

/// Mean of squared differences over every entry of two `samples × links` matrices.
pub fn mse_loss(predictions: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>) -> Result<f64> {
    if predictions.dim() != targets.dim() {
        return Err(Error::ShapeMismatch(format!(
            "predictions {:?} vs targets {:?}",
            predictions.dim(),
            targets.dim()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let sum: f64 = predictions.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / predictions.len() as f64)
}

/// Predictions for every window, one row per window.
pub fn predict_batch(model: &GltModel, batch: &[WindowSample]) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((batch.len(), model.num_links()));
    for (mut row, sample) in out.rows_mut().into_iter().zip(batch) {
        row.assign(&model.forward(sample.inputs.view())?);
    }
    Ok(out)
}

fn stacked_targets(batch: &[WindowSample], n: usize) -> Array2<f64> {
    let mut out = Array2::zeros((batch.len(), n));
    for (mut row, sample) in out.rows_mut().into_iter().zip(batch) {
        row.assign(&sample.target);
    }
    out
}

/// MSE of the model's predictions over `batch`.
pub fn batch_loss(model: &GltModel, batch: &[WindowSample]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let preds = predict_batch(model, batch)?;
    mse_loss(preds.view(), stacked_targets(batch, model.num_links()).view())
}

fn add_outer(acc: &mut Array2<f64>, left: ArrayView1<'_, f64>, right: ArrayView1<'_, f64>) {
    for (mut row, &l) in acc.rows_mut().into_iter().zip(left) {
        if l != 0.0 {
            row.scaled_add(l, &right);
        }
    }
}

/// Loss and exact gradients by backpropagation through time over every
/// window in `batch`. Per-sample contributions are summed in sample order.
/// Off-mask gradient entries are zero.
pub fn backward(model: &GltModel, batch: &[WindowSample]) -> Result<(f64, GradientSet)> {
    let refs: Vec<&WindowSample> = batch.iter().collect();
    backward_refs(model, &refs)
}

fn backward_refs(model: &GltModel, batch: &[&WindowSample]) -> Result<(f64, GradientSet)> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = model.num_links();
    let total = (batch.len() * n) as f64;
    let eff = model.effective();
    let params = model.params();
    let mut grads = params.zeros_like();
    let mut loss_sum = 0.0;

    for sample in batch {
        if sample.target.len() != n {
            return Err(Error::ShapeMismatch(format!("target has length {}, expected {n}", sample.target.len())));
        }
        let trace = model.trace(sample.inputs.view())?;
        let residual = trace.prediction() - &sample.target;
        loss_sum += residual.iter().map(|r| r * r).sum::<f64>();

        let mut d_hidden = residual * (2.0 / total);
        let mut d_cell = Array1::<f64>::zeros(n);
        for (tau, step) in trace.steps.iter().enumerate().rev() {
            d_cell += &(&d_hidden * &step.output * &step.tanh_cell.mapv(|t| 1.0 - t * t));

            let d_output = &d_hidden * &step.tanh_cell * &step.output.mapv(|o| o * (1.0 - o));
            let d_forget = &d_cell * &step.mixed * &step.forget.mapv(|f| f * (1.0 - f));
            let d_input = &d_cell * &step.candidate * &step.input.mapv(|i| i * (1.0 - i));
            let d_candidate = &d_cell * &step.input * &step.candidate.mapv(|c| 1.0 - c * c);
            let d_mixed = &d_cell * &step.forget;

            add_outer(&mut grads.cell, d_mixed.view(), step.prev_cell.view());
            let next_d_cell = eff.cell.t().dot(&d_mixed);

            let mut d_features = Array1::<f64>::zeros(step.features.len());
            let mut next_d_hidden = Array1::<f64>::zeros(n);
            for (gate, d_pre) in [
                (Gate::Input, &d_input),
                (Gate::Forget, &d_forget),
                (Gate::Output, &d_output),
                (Gate::Candidate, &d_candidate),
            ] {
                let p = params.gate(gate);
                let g = grads.gate_mut(gate);
                add_outer(&mut g.input, d_pre.view(), step.features.view());
                add_outer(&mut g.hidden, d_pre.view(), step.prev_hidden.view());
                g.bias += d_pre;
                d_features += &p.input.t().dot(d_pre);
                next_d_hidden += &p.hidden.t().dot(d_pre);
            }

            let x = sample.inputs.row(tau);
            for (k, conv) in grads.conv.iter_mut().enumerate() {
                add_outer(conv, d_features.slice(s![k * n..(k + 1) * n]), x);
            }
            d_hidden = next_d_hidden;
            d_cell = next_d_cell;
        }
    }

    model.mask_gradients(&mut grads);
    let loss = loss_sum / total;
    if !loss.is_finite() || !grads.is_finite() {
        return Err(Error::NonFinite("loss or gradients".into()));
    }
    Ok((loss, grads))
}

/// Stops once the monitored loss has not improved for `patience` consecutive epochs.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    stale: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            stale: 0,
        }
    }

    /// Records `loss` for `epoch`; returns true if it is a new best.
    pub fn observe(&mut self, epoch: usize, loss: f64) -> bool {
        if loss < self.best {
            self.best = loss;
            self.best_epoch = epoch;
            self.stale = 0;
            true
        } else {
            self.stale += 1;
            false
        }
    }

    pub fn should_stop(&self) -> bool {
        self.stale >= self.patience
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

/// Mini-batch RMSProp with per-epoch shuffling and early stopping on
/// validation MSE. Returns the parameters of the best validation epoch.
pub fn train(
    model: GltModel,
    train_windows: &[WindowSample],
    validation_windows: &[WindowSample],
    config: &TrainConfig,
) -> Result<(GltModel, TrainLog)> {
    config.validate()?;
    if train_windows.is_empty() {
        return Err(Error::EmptyDataset("no training windows".into()));
    }
    if validation_windows.is_empty() {
        return Err(Error::EmptyDataset("no validation windows".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = model;
    let mut state = RmsPropState::new(model.params());
    let mut order: Vec<usize> = (0..train_windows.len()).collect();
    let mut stopper = EarlyStopping::new(config.early_stop_patience);
    let mut best_model = model.clone();
    let mut log = TrainLog::new(batch_loss(&model, validation_windows)?);

    for epoch in 1..=config.max_epochs {
        let started = Instant::now();
        order.shuffle(&mut rng);
        let mut weighted = 0.0;
        let mut batch = Vec::with_capacity(config.batch_size);
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| &train_windows[i]));
            let (loss, mut grads) = backward_refs(&model, &batch)?;
            weighted += loss * batch.len() as f64;
            if let Some(limit) = config.clip_norm {
                let norm = grads.norm();
                if norm > limit {
                    grads.scale(limit / norm);
                }
            }
            rmsprop_update(&mut model, &grads, &mut state, config)?;
        }
        let train_mse = weighted / train_windows.len() as f64;
        let val_mse = batch_loss(&model, validation_windows)?;
        if stopper.observe(epoch, val_mse) {
            best_model = model.clone();
        }
        log.push(EpochRecord {
            epoch,
            train_mse,
            val_mse,
            seconds: started.elapsed().as_secs_f64(),
        });
        if stopper.should_stop() {
            log.finish(stopper.best_epoch(), StopReason::EarlyStop);
            return Ok((best_model, log));
        }
    }
    log.finish(stopper.best_epoch(), StopReason::MaxEpochs);
    Ok((best_model, log))
}
