//! The estimator network: normalized magnitude response in, cascade
//! parameters out.

mod checkpoint;
mod model;
mod train;

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, Checkpoint, FORMAT_VERSION,
};
pub use model::{layer_norm, ForwardCache, MlpModel, MlpShape, Real, LAYER_NORM_EPS, LRELU_ALPHA};
pub use train::{
    adamw_update, batch_loss_and_grad, clip_grad_norm, log_to_csv, train, EpochLog, Example, TrainConfig,
    TrainState, Trainer, HIGH_ORDER_LR,
};

use crate::dsp::{normalize_for_network, FilterCascade, MagnitudeResponse};
use crate::error::{Error, Result};
use crate::grad::{params_to_cascade, GainMode};

/// Designs a minimum-phase cascade for `target` in one forward pass.
pub fn estimate<T: Real>(model: &MlpModel<T>, target: &MagnitudeResponse) -> Result<FilterCascade> {
    let f = model.shape().input_dim;
    if target.len() != f {
        return Err(Error::GridMismatch {
            left: target.len(),
            right: f,
        });
    }
    let x: Vec<T> = normalize_for_network(target).into_iter().map(T::from_f64).collect();
    let out: Vec<f64> = model.forward(&x)?.into_iter().map(|v| v.to_f64()).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::degenerate("network produced non-finite outputs"));
    }
    Ok(params_to_cascade(&out, GainMode::Sigmoid100))
}
