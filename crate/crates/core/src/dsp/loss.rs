use super::MagnitudeResponse;
use crate::error::{Error, Result};

/// Network inputs are clipped to `±NETWORK_CLIP_DB` before scaling to `[-1, 1]`.
pub const NETWORK_CLIP_DB: f64 = 128.0;

/// Mean squared difference of two dB responses on the same grid.
pub fn db_mse(estimate: &MagnitudeResponse, target: &MagnitudeResponse) -> Result<f64> {
    if !estimate.grid.same_as(&target.grid) || estimate.len() != target.len() {
        return Err(Error::GridMismatch {
            left: estimate.len(),
            right: target.len(),
        });
    }
    Ok(mse(&estimate.values_db, &target.values_db))
}

pub(crate) fn mse(a: &[f64], b: &[f64]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    sum / a.len() as f64
}

pub fn normalize_for_network(target: &MagnitudeResponse) -> Vec<f64> {
    target
        .values_db
        .iter()
        .map(|v| v.clamp(-NETWORK_CLIP_DB, NETWORK_CLIP_DB) / NETWORK_CLIP_DB)
        .collect()
}
