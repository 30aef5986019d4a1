use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{CoefficientFilter, FilterCascade, FrequencyGrid, MagnitudeResponse, Section};
use crate::error::{Error, Result};
use crate::poly;

const DB_PER_LOG10_POWER: f64 = 10.0;

/// `|c0 + c1 e^{-iω} + c2 e^{-2iω}|²` on the grid tables.
#[inline]
pub(crate) fn quad_energy(c: [f64; 3], cos1: f64, sin1: f64, cos2: f64, sin2: f64) -> f64 {
    let re = c[0] + c[1] * cos1 + c[2] * cos2;
    let im = -(c[1] * sin1 + c[2] * sin2);
    re * re + im * im
}

/// Gain plus per-section log-magnitudes, evaluated directly per frequency.
pub fn cascade_response_db(
    cascade: &FilterCascade,
    grid: &FrequencyGrid,
) -> Result<MagnitudeResponse> {
    if !(cascade.gain > 0.0) {
        return Err(Error::invalid(format!(
            "cascade gain must be positive, got {}",
            cascade.gain
        )));
    }
    let gain_db = 20.0 * cascade.gain.log10();
    let (cos1, sin1, cos2, sin2) = grid.trig();
    let mut out = vec![gain_db; grid.len()];
    for (z, p) in cascade.zeros.iter().zip(&cascade.poles) {
        let num = [1.0, -2.0 * z.re, z.norm_sqr()];
        let den = [1.0, -2.0 * p.re, p.norm_sqr()];
        for j in 0..grid.len() {
            let en = quad_energy(num, cos1[j], sin1[j], cos2[j], sin2[j]);
            let ed = quad_energy(den, cos1[j], sin1[j], cos2[j], sin2[j]);
            if ed == 0.0 {
                return Err(Error::degenerate(format!(
                    "pole {p} on the unit circle at grid point {j}"
                )));
            }
            out[j] += DB_PER_LOG10_POWER * (en / ed).log10();
        }
    }
    finite_response(grid, out)
}

/// Response of a single biquad (`a0` need not be 1).
pub fn section_response_db(section: &Section, grid: &FrequencyGrid) -> Result<MagnitudeResponse> {
    let (cos1, sin1, cos2, sin2) = grid.trig();
    let mut out = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        let en = quad_energy(section.b, cos1[j], sin1[j], cos2[j], sin2[j]);
        let ed = quad_energy(section.a, cos1[j], sin1[j], cos2[j], sin2[j]);
        if ed == 0.0 {
            return Err(Error::degenerate(format!(
                "section denominator vanishes at grid point {j}"
            )));
        }
        out.push(DB_PER_LOG10_POWER * (en / ed).log10());
    }
    finite_response(grid, out)
}

/// `20·log10(|B(e^{iω})| / |A(e^{iω})|)` by Horner evaluation at each grid
/// point. This is the reference path.
pub fn coeff_response_db(
    filter: &CoefficientFilter,
    grid: &FrequencyGrid,
) -> Result<MagnitudeResponse> {
    let mut out = Vec::with_capacity(grid.len());
    for (j, &w) in grid.omegas().iter().enumerate() {
        let b = poly::eval_unit_circle(&filter.numerator, w);
        let a = poly::eval_unit_circle(&filter.denominator, w);
        out.push(ratio_db(b, a, j)?);
    }
    finite_response(grid, out)
}

/// FFT evaluation for grids whose points coincide with the bins of a
/// real FFT of size `2(F-1)`. Coefficients are zero padded (or aliased,
/// never, since `N < 2(F-1)` is required).
pub fn coeff_response_db_fft(
    filter: &CoefficientFilter,
    grid: &FrequencyGrid,
) -> Result<MagnitudeResponse> {
    let f = grid.len();
    let size = 2 * (f - 1);
    if filter.numerator.len() > size || filter.denominator.len() > size {
        return Err(Error::invalid(format!(
            "order {} too high for an FFT of size {size}",
            filter.order()
        )));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(size);
    let spectrum = |c: &[f64]| {
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for (slot, &v) in buf.iter_mut().zip(c) {
            slot.re = v;
        }
        fft.process(&mut buf);
        buf
    };
    let num = spectrum(&filter.numerator);
    let den = spectrum(&filter.denominator);
    let out = (0..f)
        .map(|j| ratio_db(num[j], den[j], j))
        .collect::<Result<Vec<_>>>()?;
    finite_response(grid, out)
}

fn ratio_db(b: Complex64, a: Complex64, j: usize) -> Result<f64> {
    let ea = a.norm_sqr();
    if ea == 0.0 {
        return Err(Error::degenerate(format!(
            "denominator vanishes at grid point {j}"
        )));
    }
    Ok(DB_PER_LOG10_POWER * (b.norm_sqr() / ea).log10())
}

fn finite_response(grid: &FrequencyGrid, values: Vec<f64>) -> Result<MagnitudeResponse> {
    if let Some(j) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::degenerate(format!(
            "non-finite magnitude at grid point {j}"
        )));
    }
    Ok(MagnitudeResponse {
        grid: grid.clone(),
        values_db: values,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::dsp::make_grid;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Oracle: |1 + 0.25 e^{-2iω}| in dB at ω = 0 and ω = π/2.
    fn notch_oracle(w: f64) -> f64 {
        let v = c(1.0, 0.0) + c(0.25, 0.0) * Complex64::from_polar(1.0, -2.0 * w);
        20.0 * v.norm().log10()
    }

    #[test]
    fn identity_and_gain_only_cascades() {
        let g = make_grid(64, 44100.0).unwrap();
        let r = cascade_response_db(&FilterCascade::identity(3, 1.0), &g).unwrap();
        assert!(r.values_db.iter().all(|&v| v == 0.0));
        let r = cascade_response_db(&FilterCascade::identity(3, 10.0), &g).unwrap();
        assert!(r.values_db.iter().all(|&v| (v - 20.0).abs() < 1e-12));
    }

    #[test]
    fn single_zero_pair_against_direct_complex_arithmetic() {
        let expect0 = notch_oracle(0.0);
        let expect1 = notch_oracle(PI / 2.0);
        assert!((expect0 - 1.9382).abs() < 1e-4);
        assert!((expect1 + 2.4988).abs() < 1e-4);

        let g = make_grid(3, 44100.0).unwrap();
        let cascade = FilterCascade::new(1.0, vec![c(0.0, 0.0)], vec![c(0.0, 0.5)]).unwrap();
        let r = cascade_response_db(&cascade, &g).unwrap();
        assert!((r.values_db[0] - expect0).abs() < 1e-12);
        assert!((r.values_db[1] - expect1).abs() < 1e-12);
        assert!((r.values_db[2] - expect0).abs() < 1e-12);

        let f = CoefficientFilter::new(vec![1.0, 0.0, 0.25], vec![1.0, 0.0, 0.0]).unwrap();
        let r = coeff_response_db(&f, &g).unwrap();
        assert!((r.values_db[0] - expect0).abs() < 1e-12);
        assert!((r.values_db[1] - expect1).abs() < 1e-12);
        assert!((r.values_db[2] - expect0).abs() < 1e-12);
    }

    #[test]
    fn equal_numerator_and_denominator_is_flat() {
        let g = make_grid(33, 48000.0).unwrap();
        let f = CoefficientFilter::new(vec![1.0, 0.3, -0.2], vec![1.0, 0.3, -0.2]).unwrap();
        let r = coeff_response_db(&f, &g).unwrap();
        assert!(r.values_db.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn pole_on_grid_is_an_error() {
        let g = make_grid(3, 44100.0).unwrap();
        // Double pole at z = 1 sits exactly on ω = 0.
        let cascade = FilterCascade::new(1.0, vec![c(1.0, 0.0)], vec![c(0.0, 0.0)]).unwrap();
        let err = cascade_response_db(&cascade, &g).unwrap_err();
        assert!(matches!(err, Error::DegenerateResponse(_)));

        let f = CoefficientFilter::new(vec![1.0], vec![1.0, -1.0]).unwrap();
        assert!(coeff_response_db(&f, &g).is_err());
    }

    #[test]
    fn fft_path_matches_direct_path() {
        use rand::{Rng, SeedableRng};
        use rand_distr::StandardNormal;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = make_grid(513, 44100.0).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let b: Vec<f64> = (0..17).map(|_| rng.sample(StandardNormal)).collect();
            let a: Vec<f64> = (0..17).map(|_| rng.sample(StandardNormal)).collect();
            let f = CoefficientFilter::new(b, a).unwrap();
            let d = coeff_response_db(&f, &g).unwrap();
            let q = coeff_response_db_fft(&f, &g).unwrap();
            for (x, y) in d.values_db.iter().zip(&q.values_db) {
                worst = worst.max((x - y).abs());
            }
        }
        assert!(worst < 1e-9, "max deviation {worst}");
    }
}
