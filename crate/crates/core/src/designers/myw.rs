use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dsp::{coeff_response_db, CoefficientFilter, MagnitudeResponse};
use crate::error::{Error, Result};
use crate::{linalg, poly};

/// Radius that roots landing on the unit circle are pulled to.
const MAX_ROOT_RADIUS: f64 = 1.0 - 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MywConfig {
    pub order: usize,
    /// Highest autocorrelation lag used; equations run over lags N+1..=M.
    pub acf_lags: usize,
    /// Length of the full-circle spectral grid.
    pub fft_size: usize,
}

impl MywConfig {
    /// `M = 4N` and the smallest power of two at least `4F`.
    pub fn new(order: usize, f_count: usize) -> Self {
        Self {
            order,
            acf_lags: 4 * order,
            fft_size: (4 * f_count).next_power_of_two(),
        }
    }

    fn validate(&self, f_count: usize) -> Result<()> {
        if self.order < 2 || self.order % 2 != 0 {
            return Err(Error::invalid(format!("order must be even and >= 2, got {}", self.order)));
        }
        if self.acf_lags < self.order + 1 {
            return Err(Error::invalid("acf_lags must be at least order + 1"));
        }
        if !self.fft_size.is_power_of_two() || self.fft_size < 2 * (f_count - 1) {
            return Err(Error::invalid("fft_size must be a power of two >= 2(F-1)"));
        }
        if self.acf_lags >= self.fft_size / 2 {
            return Err(Error::invalid("acf_lags must be below half the FFT size"));
        }
        Ok(())
    }
}

/// Target dB interpolated linearly onto `ω_k = 2πk/L`, `k = 0..=L/2`.
fn half_circle_db(target: &MagnitudeResponse, l: usize) -> Vec<f64> {
    let f = target.len();
    let v = &target.values_db;
    (0..=l / 2)
        .map(|k| {
            let pos = k as f64 * 2.0 * (f - 1) as f64 / l as f64;
            let i = (pos.floor() as usize).min(f - 2);
            let t = pos - i as f64;
            v[i] * (1.0 - t) + v[i + 1] * t
        })
        .collect()
}

/// Expands a half-circle real spectrum to the full circle (even symmetry).
fn full_circle(half: &[f64]) -> Vec<Complex64> {
    let l = 2 * (half.len() - 1);
    (0..l)
        .map(|k| Complex64::new(half[if k <= l / 2 { k } else { l - k }], 0.0))
        .collect()
}

/// Real part of the inverse DFT, scaled by `1/L`.
fn inverse_real(planner: &mut FftPlanner<f64>, mut buf: Vec<Complex64>) -> Vec<f64> {
    let l = buf.len();
    planner.plan_fft_inverse(l).process(&mut buf);
    buf.into_iter().map(|c| c.re / l as f64).collect()
}

/// Moves every root onto or inside the unit circle: outside roots are
/// reflected to `1/conj(r)`, roots on the circle are pulled just inside.
fn reflect_inside(roots: &mut [Complex64]) {
    for r in roots.iter_mut() {
        let m = r.norm();
        if m >= 1.0 {
            *r = 1.0 / r.conj();
        }
        if r.norm() > MAX_ROOT_RADIUS {
            *r *= MAX_ROOT_RADIUS / r.norm();
        }
    }
}

fn stabilized(c: &[f64]) -> Result<Vec<f64>> {
    let lead = c[0];
    let mut roots = poly::roots(c)?;
    if roots.iter().all(|r| r.norm() < 1.0) {
        return Ok(c.to_vec());
    }
    reflect_inside(&mut roots);
    Ok(poly::from_roots(&roots).into_iter().map(|v| v * lead).collect())
}

/// Denominator from the overdetermined modified Yule-Walker equations
/// `Σ_{k=0..N} a_k r[m-k] = 0`, `m = N+1..=M`, with `a_0 = 1`. `None` when
/// the system is numerically singular.
fn myw_denominator(r: &[f64], n: usize, m: usize) -> Option<Vec<f64>> {
    let rows = m - n;
    let mut a = vec![0.0; rows * n];
    let mut b = vec![0.0; rows];
    for (i, lag) in (n + 1..=m).enumerate() {
        for k in 1..=n {
            a[i * n + (k - 1)] = r[lag - k];
        }
        b[i] = -r[lag];
    }
    let floor = 1e-10 * r[0].abs();
    let sol = linalg::lstsq(&a, rows, n, &b, floor)?;
    let mut den = vec![1.0];
    den.extend(sol);
    den.iter().all(|v| v.is_finite()).then_some(den)
}

/// Minimum-phase sequence with magnitude `exp(log_mag)` via the folded
/// real cepstrum; `log_mag` covers the full circle.
fn min_phase_from_log_magnitude(planner: &mut FftPlanner<f64>, log_mag: Vec<Complex64>) -> Vec<f64> {
    let l = log_mag.len();
    let c = inverse_real(planner, log_mag);
    let mut folded = vec![Complex64::new(0.0, 0.0); l];
    folded[0] = c[0].into();
    folded[l / 2] = c[l / 2].into();
    for n in 1..l / 2 {
        folded[n] = (2.0 * c[n]).into();
    }
    planner.plan_fft_forward(l).process(&mut folded);
    let spectrum: Vec<Complex64> = folded.into_iter().map(|z| z.exp()).collect();
    let mut buf = spectrum;
    planner.plan_fft_inverse(l).process(&mut buf);
    buf.into_iter().map(|z| z.re / l as f64).collect()
}

fn gain_only(order: usize, target: &MagnitudeResponse) -> Result<CoefficientFilter> {
    let mut num = vec![0.0; order + 1];
    num[0] = 10f64.powf(target.mean_db() / 20.0);
    let mut den = vec![0.0; order + 1];
    den[0] = 1.0;
    CoefficientFilter::new(num, den)
}

pub fn myw_design(target: &MagnitudeResponse, cfg: &MywConfig) -> Result<CoefficientFilter> {
    cfg.validate(target.len())?;
    if !target.is_finite() {
        return Err(Error::invalid("target response must be finite"));
    }
    let (n, l) = (cfg.order, cfg.fft_size);
    let mut planner = FftPlanner::new();

    let half_db = half_circle_db(target, l);
    let power: Vec<f64> = half_db.iter().map(|d| 10f64.powf(d / 10.0)).collect();
    let r = inverse_real(&mut planner, full_circle(&power));

    let Some(den) = myw_denominator(&r, n, cfg.acf_lags) else {
        return gain_only(n, target);
    };
    let den = stabilized(&den)?;

    // |B| = |H|·|A| on the half circle, then a minimum-phase factor.
    let log_b: Vec<f64> = half_db
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let w = std::f64::consts::TAU * k as f64 / l as f64;
            let a = poly::eval_unit_circle(&den, w).norm().max(1e-300);
            d / 20.0 * std::f64::consts::LN_10 + a.ln()
        })
        .collect();
    let b_full = min_phase_from_log_magnitude(&mut planner, full_circle(&log_b));
    let num = stabilized(&b_full[..=n])?;

    let mut filter = CoefficientFilter::new(num, den)?;
    let est = coeff_response_db(&filter, &target.grid)?;
    let shift = 10f64.powf((target.mean_db() - est.mean_db()) / 20.0);
    filter.numerator.iter_mut().for_each(|b| *b *= shift);
    Ok(filter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{db_mse, make_grid};

    #[test]
    fn recovers_ar2_denominator() {
        let grid = make_grid(512, 44100.0).unwrap();
        let ar = CoefficientFilter::new(vec![1.0, 0.0, 0.0], vec![1.0, -1.2, 0.72]).unwrap();
        let target = coeff_response_db(&ar, &grid).unwrap();
        let f = myw_design(&target, &MywConfig::new(2, 512)).unwrap();
        for (got, want) in f.denominator.iter().zip([1.0, -1.2, 0.72]) {
            assert!((got - want).abs() < 1e-2, "{:?}", f.denominator);
        }
        let fit = coeff_response_db(&f, &grid).unwrap();
        assert!(db_mse(&fit, &target).unwrap() < 1e-2);
    }

    #[test]
    fn flat_target_gives_flat_fit() {
        let grid = make_grid(512, 44100.0).unwrap();
        for level in [0.0, -12.0] {
            let target = MagnitudeResponse::flat(&grid, level);
            let f = myw_design(&target, &MywConfig::new(8, 512)).unwrap();
            let fit = coeff_response_db(&f, &grid).unwrap();
            assert!(fit.values_db.iter().all(|v| (v - level).abs() < 0.5));
        }
    }

    #[test]
    fn rejects_bad_config() {
        let grid = make_grid(64, 44100.0).unwrap();
        let t = MagnitudeResponse::flat(&grid, 0.0);
        assert!(myw_design(&t, &MywConfig { order: 3, acf_lags: 12, fft_size: 256 }).is_err());
        assert!(myw_design(&t, &MywConfig { order: 4, acf_lags: 4, fft_size: 256 }).is_err());
        assert!(myw_design(&t, &MywConfig { order: 4, acf_lags: 16, fft_size: 100 }).is_err());
    }

    #[test]
    fn reflection_preserves_shape() {
        let mut roots = vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.3, 0.1)];
        reflect_inside(&mut roots);
        assert!((roots[0] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!(roots[1].norm() < 1.0);
        assert_eq!(roots[2], Complex64::new(0.3, 0.1));
    }
}
