use super::{GradientSet, TrainConfig};
use crate::error::{Error, Result};
use crate::model::{GltModel, Params};

/// Running mean of squared gradients, one accumulator per parameter entry.
#[derive(Debug, Clone, PartialEq)]
pub struct RmsPropState {
    mean_square: Params,
}

impl RmsPropState {
    pub fn new(like: &Params) -> Self {
        Self {
            mean_square: like.zeros_like(),
        }
    }

    pub fn mean_square(&self) -> &Params {
        &self.mean_square
    }
}

/// `s ← α·s + (1−α)·g²`, then `θ ← θ − lr·g / (√s + ε)`.
pub(crate) fn rmsprop_step(theta: &mut f64, grad: f64, mean_square: &mut f64, lr: f64, alpha: f64, eps: f64) {
    *mean_square = alpha * *mean_square + (1.0 - alpha) * grad * grad;
    *theta -= lr * grad / (mean_square.sqrt() + eps);
}

/// Applies one RMSProp step to every parameter. Masked-out weights receive a
/// zero gradient and therefore stay exactly zero.
pub fn rmsprop_update(model: &mut GltModel, grads: &GradientSet, state: &mut RmsPropState, config: &TrainConfig) -> Result<()> {
    let (lr, alpha, eps) = (config.learning_rate, config.rmsprop_alpha, config.rmsprop_epsilon);
    let params = model.params_mut();
    for ((theta, g), s) in params
        .blocks_mut()
        .into_iter()
        .zip(grads.blocks())
        .zip(state.mean_square.blocks_mut())
    {
        if theta.values.len() != g.values.len() || g.values.len() != s.values.len() {
            return Err(Error::ShapeMismatch(format!("gradient block {} does not match parameters", g.name)));
        }
        for ((t, &gv), sv) in theta.values.iter_mut().zip(g.values).zip(s.values.iter_mut()) {
            rmsprop_step(t, gv, sv, lr, alpha, eps);
        }
    }
    if !params.is_finite() {
        return Err(Error::NonFinite("parameters after RMSProp update".into()));
    }
    model.freeze_masked();
    Ok(())
}
