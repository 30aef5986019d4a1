//! Measured impulse responses to smoothed magnitude targets.

mod magnitude;
mod resample;
mod savgol;
mod synthetic;
mod wav;

pub use magnitude::{ir_to_magnitude, MAGNITUDE_FLOOR_DB};
pub use resample::{resample, STOPBAND_DB};
pub use savgol::{savgol_smooth, SavgolFilter, SmoothingConfig};
pub use synthetic::{cascade_impulse_response, synthetic_ir_set, SyntheticSet};
pub use wav::{encode_wav, parse_wav, read_wav, write_wav, SampleFormat};

use crate::dsp::{FrequencyGrid, MagnitudeResponse};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ImpulseResponse {
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
    pub channel_index: usize,
}

impl ImpulseResponse {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64, channel_index: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("impulse response is empty"));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("impulse response has non-finite samples"));
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::invalid("sample rate must be positive"));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            channel_index,
        })
    }
}

/// Resample to the grid rate, take the magnitude, smooth in dB.
///
/// The resampler preserves signal amplitude, which scales an impulse
/// response's spectrum by the rate ratio; that factor is undone here so the
/// system's magnitude response is unchanged.
pub fn ir_to_target(
    ir: &ImpulseResponse,
    grid: &FrequencyGrid,
    smoothing: &SmoothingConfig,
) -> Result<MagnitudeResponse> {
    let ratio = ir.sample_rate_hz / grid.sample_rate_hz();
    let mut ir = resample(ir, grid.sample_rate_hz())?;
    if ratio != 1.0 {
        ir.samples.iter_mut().for_each(|s| *s *= ratio);
    }
    savgol_smooth(&ir_to_magnitude(&ir, grid)?, smoothing)
}
