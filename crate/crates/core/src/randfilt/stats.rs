//! Root-statistics estimators for the random families.
//!
//! Each estimator draws from `Stream::Generate` with one independent
//! generator per trial, so results do not depend on the worker count.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{
    draw_rng, gaussian_matrix_eigenvalues, sample_disk_root, sample_family_a, RadialLaw, Stream,
};
use crate::error::Result;
use crate::poly;

/// Eigenvalues reported by the QR iteration as real carry an exact zero
/// imaginary part.
pub fn count_real(roots: &[Complex64]) -> usize {
    roots.iter().filter(|r| r.im == 0.0).count()
}

/// Fraction of roots that are real across `count` quadratics with
/// standard-normal coefficients.
pub fn quadratic_real_root_fraction(count: u64, seed: u64) -> f64 {
    const CHUNK: u64 = 1 << 16;
    let chunks = count.div_ceil(CHUNK);
    let real: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = draw_rng(seed, Stream::Generate, c, 0);
            let n = CHUNK.min(count - c * CHUNK);
            (0..n)
                .filter(|_| {
                    let [a, b, c] = [0; 3].map(|_| rng.sample::<f64, _>(StandardNormal));
                    b * b - 4.0 * a * c >= 0.0
                })
                .count() as u64
        })
        .sum();
    real as f64 / count as f64
}

/// Mean number of real roots of family-A numerator polynomials.
pub fn family_a_mean_real_roots(order: usize, draws: u64, seed: u64) -> Result<f64> {
    let total = (0..draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(seed, Stream::Generate, i, 0);
            let filter = sample_family_a(order, &mut rng)?;
            Ok(count_real(&poly::roots(&filter.numerator)?) as u64)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum::<u64>();
    Ok(total as f64 / draws as f64)
}

/// Fraction of family-A numerator roots with `lo < |r| < hi`.
pub fn family_a_annulus_fraction(order: usize, draws: u64, seed: u64, lo: f64, hi: f64) -> Result<f64> {
    let inside = (0..draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(seed, Stream::Generate, i, 0);
            let filter = sample_family_a(order, &mut rng)?;
            let roots = poly::roots(&filter.numerator)?;
            Ok(roots.iter().filter(|r| r.norm() > lo && r.norm() < hi).count() as u64)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum::<u64>();
    Ok(inside as f64 / (draws as f64 * order as f64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenStats {
    pub mean_real: f64,
    /// Fraction of eigenvalues with modulus below the requested radius.
    pub fraction_inside: f64,
}

/// Real-eigenvalue count and modulus spread of scaled Gaussian matrices.
pub fn gaussian_eigen_stats(
    n: usize,
    trials: u64,
    seed: u64,
    power: f64,
    radius: f64,
) -> Result<EigenStats> {
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(seed, Stream::Generate, i, 0);
            let eig = gaussian_matrix_eigenvalues(n, power, &mut rng)?;
            let inside = eig.iter().filter(|e| e.norm() < radius).count();
            Ok((count_real(&eig) as u64, inside as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let (real, inside) = per_trial
        .into_iter()
        .fold((0, 0), |(r, s), (a, b)| (r + a, s + b));
    Ok(EigenStats {
        mean_real: real as f64 / trials as f64,
        fraction_inside: inside as f64 / (trials as f64 * n as f64),
    })
}

/// Moduli of `count` disk roots drawn under `law`.
pub fn disk_root_moduli(law: RadialLaw, count: u64, seed: u64) -> Vec<f64> {
    const CHUNK: u64 = 1 << 16;
    (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = draw_rng(seed, Stream::Generate, c, 0);
            let n = CHUNK.min(count - c * CHUNK);
            (0..n).map(move |_| sample_disk_root(law, &mut rng).norm())
        })
        .collect()
}

/// Kolmogorov-Smirnov distance between the samples and a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// `(2/π)·ln n + 0.626`, the Kac real-root asymptotic with its constant.
pub fn kac_real_root_estimate(n: usize) -> f64 {
    2.0 / std::f64::consts::PI * (n as f64).ln() + 0.626
}

/// `√(2N/π)`, the leading-order real-eigenvalue count.
pub fn real_eigenvalue_estimate(n: usize) -> f64 {
    (2.0 * n as f64 / std::f64::consts::PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_exact_quantiles_is_half_step() {
        let n = 1000;
        let s: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_statistic(&s, |x| x) - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn counts_exact_real_only() {
        let r = [Complex64::new(0.3, 0.0), Complex64::new(0.1, 1e-300), Complex64::new(-2.0, 0.0)];
        assert_eq!(count_real(&r), 2);
    }

    #[test]
    fn quadratic_fraction_is_thread_independent() {
        let a = quadratic_real_root_fraction(200_000, 3);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| quadratic_real_root_fraction(200_000, 3));
        assert_eq!(a, b);
    }
}
