//! Polyphase windowed-sinc sample-rate conversion.

use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::ImpulseResponse;

/// Stopband attenuation of the anti-aliasing filter in dB.
pub const STOPBAND_DB: f64 = 90.0;
/// Passband edge as a fraction of the lower Nyquist frequency.
const PASSBAND_FRACTION: f64 = 0.9;
const MAX_PHASES: u64 = 4096;

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let (mut term, mut sum, mut k) = (1.0, 1.0, 1.0);
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Best `up/down ≈ ratio` with `up <= MAX_PHASES`, via continued fractions.
fn rational_ratio(ratio: f64) -> Result<(u64, u64)> {
    let (mut h0, mut h1, mut k0, mut k1) = (0u64, 1u64, 1u64, 0u64);
    let mut x = ratio;
    let mut best = None;
    for _ in 0..64 {
        let a = x.floor() as u64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if h2 > MAX_PHASES {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - ratio).abs() <= 1e-6 * ratio {
            best = Some((h1, k1));
            break;
        }
        let frac = x - a as f64;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    best.ok_or_else(|| Error::Unsupported(format!("rate ratio {ratio} has no rational form with at most {MAX_PHASES} phases")))
}

/// Precomputed filter bank: `taps[φ]` are the weights for output phase `φ`.
struct Polyphase {
    up: u64,
    down: u64,
    half: i64,
    taps: Vec<Vec<f64>>,
}

impl Polyphase {
    fn new(up: u64, down: u64) -> Self {
        // Normalized to the input rate, in cycles per sample.
        let nyquist = 0.5 * (up as f64 / down as f64).min(1.0);
        let transition = (1.0 - PASSBAND_FRACTION) * nyquist;
        let cutoff = nyquist - transition / 2.0;
        let len = ((STOPBAND_DB - 7.95) / (14.36 * transition)).ceil();
        let half = (len / 2.0).ceil() as i64;
        let beta = kaiser_beta(STOPBAND_DB);
        let i0b = bessel_i0(beta);
        let kernel = |u: f64| {
            let r = u / half as f64;
            if r.abs() >= 1.0 {
                return 0.0;
            }
            let w = bessel_i0(beta * (1.0 - r * r).sqrt()) / i0b;
            let x = 2.0 * cutoff * u;
            let sinc = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
            2.0 * cutoff * sinc * w
        };
        let taps = (0..up)
            .map(|phase| {
                let frac = phase as f64 / up as f64;
                let mut t: Vec<f64> = (-half + 1..=half).map(|j| kernel(frac - j as f64)).collect();
                let s: f64 = t.iter().sum();
                t.iter_mut().for_each(|v| *v /= s);
                t
            })
            .collect();
        Self {
            up,
            down,
            half,
            taps,
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let out_len = (x.len() as u64 * self.up).div_ceil(self.down) as usize;
        (0..out_len as u64)
            .map(|n| {
                let pos = n * self.down;
                let base = (pos / self.up) as i64;
                let taps = &self.taps[(pos % self.up) as usize];
                taps.iter()
                    .enumerate()
                    .filter_map(|(k, w)| {
                        let idx = base + k as i64 - self.half + 1;
                        (idx >= 0 && (idx as usize) < x.len()).then(|| w * x[idx as usize])
                    })
                    .sum()
            })
            .collect()
    }
}

pub fn resample(ir: &ImpulseResponse, to_hz: f64) -> Result<ImpulseResponse> {
    if !(to_hz > 0.0 && to_hz.is_finite()) {
        return Err(Error::invalid(format!("target rate must be positive, got {to_hz}")));
    }
    if to_hz == ir.sample_rate_hz {
        return Ok(ir.clone());
    }
    let (up, down) = rational_ratio(to_hz / ir.sample_rate_hz)?;
    let samples = Polyphase::new(up, down).apply(&ir.samples);
    ImpulseResponse::new(samples, to_hz, ir.channel_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_forms() {
        assert_eq!(rational_ratio(44100.0 / 48000.0).unwrap(), (147, 160));
        assert_eq!(rational_ratio(2.0).unwrap(), (2, 1));
        assert_eq!(rational_ratio(44100.0 / 8000.0).unwrap(), (441, 80));
        assert!(rational_ratio(std::f64::consts::PI).is_ok());
    }

    #[test]
    fn bessel_reference_values() {
        assert!((bessel_i0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-14);
        assert!((bessel_i0(5.0) - 27.239_871_823_604_45).abs() < 1e-11);
    }

    #[test]
    fn same_rate_is_identity_and_bad_rate_rejected() {
        let ir = ImpulseResponse::new(vec![0.1, -0.7, 0.3], 44100.0, 0).unwrap();
        assert_eq!(resample(&ir, 44100.0).unwrap(), ir);
        assert!(resample(&ir, 0.0).is_err());
        assert!(resample(&ir, -1.0).is_err());
    }

    #[test]
    fn length_scales_with_ratio() {
        let ir = ImpulseResponse::new(vec![0.0; 4800], 48000.0, 0).unwrap();
        assert_eq!(resample(&ir, 44100.0).unwrap().samples.len(), 4410);
        assert_eq!(resample(&ir, 96000.0).unwrap().samples.len(), 9600);
    }
}
