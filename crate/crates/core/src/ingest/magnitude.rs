use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dsp::{FrequencyGrid, MagnitudeResponse};
use crate::error::{Error, Result};

use super::ImpulseResponse;

/// Level that empty spectral bins are raised to before taking logs.
pub const MAGNITUDE_FLOOR_DB: f64 = -128.0;

/// Magnitude response of `ir` on `grid` (whose sample rate must match):
/// zero-padded FFT, dB conversion with a floor, then linear interpolation
/// in dB onto the grid frequencies.
pub fn ir_to_magnitude(ir: &ImpulseResponse, grid: &FrequencyGrid) -> Result<MagnitudeResponse> {
    if ir.samples.len() < 2 {
        return Err(Error::invalid("impulse response needs at least two samples"));
    }
    if ir.samples.iter().all(|&s| s == 0.0) {
        return Err(Error::invalid("impulse response is all zeros"));
    }
    if ir.sample_rate_hz != grid.sample_rate_hz() {
        return Err(Error::invalid(format!(
            "impulse response at {} Hz does not match the {} Hz grid; resample first",
            ir.sample_rate_hz,
            grid.sample_rate_hz()
        )));
    }
    let n = (4 * ir.samples.len()).next_power_of_two();
    let mut buf: Vec<Complex64> = ir.samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let floor = 10f64.powf(MAGNITUDE_FLOOR_DB / 20.0);
    let bins_db: Vec<f64> = buf[..=n / 2]
        .iter()
        .map(|c| 20.0 * c.norm().max(floor).log10())
        .collect();
    let values = grid
        .omegas()
        .iter()
        .map(|w| {
            let pos = w / std::f64::consts::PI * (n / 2) as f64;
            let i = (pos.floor() as usize).min(n / 2 - 1);
            let t = pos - i as f64;
            bins_db[i] * (1.0 - t) + bins_db[i + 1] * t
        })
        .collect();
    MagnitudeResponse::new(grid.clone(), values)
}
