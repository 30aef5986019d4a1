//! Real polynomials stored as coefficient vectors in ascending powers of
//! `z⁻¹` (equivalently, descending powers of `z`): `c[0] + c[1] z⁻¹ + …`.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg;

pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Evaluates `Σ c[k] · e^{-ikω}` by Horner's rule in `e^{-iω}`.
pub fn eval_unit_circle(c: &[f64], omega: f64) -> Complex64 {
    let x = Complex64::from_polar(1.0, -omega);
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * x + ck)
}

/// Monic real polynomial with the given roots. Complex roots must appear
/// together with their conjugates; tiny imaginary residue is discarded.
pub fn from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i] += ci;
            next[i + 1] -= ci * r;
        }
        c = next;
    }
    c.into_iter().map(|v| v.re).collect()
}

/// Roots of `c[0] zᴺ + c[1] zᴺ⁻¹ + … + c[N]` via the companion matrix.
/// Leading zero coefficients are dropped (they correspond to roots at
/// infinity in `z`, i.e. a lower degree).
pub fn roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let start = c.iter().position(|&v| v != 0.0).unwrap_or(c.len());
    let c = &c[start..];
    if c.len() <= 1 {
        return Ok(Vec::new());
    }
    linalg::companion_eigenvalues(c)
}

/// Expands root pairs into second-order factors `(1, -(r1+r2), r1 r2)`.
///
/// Complex roots are matched with their conjugates; remaining real roots are
/// paired in sorted order. An odd real root count leaves a first-order factor
/// padded as `(1, -r, 0)`.
pub fn pair_into_quadratics(roots: &[Complex64]) -> Vec<[f64; 3]> {
    let mut reals: Vec<f64> = Vec::new();
    let mut out = Vec::new();
    for r in roots {
        if r.im == 0.0 {
            reals.push(r.re);
        } else if r.im > 0.0 {
            out.push([1.0, -2.0 * r.re, r.norm_sqr()]);
        }
    }
    reals.sort_by(f64::total_cmp);
    for pair in reals.chunks(2) {
        match *pair {
            [r1, r2] => out.push([1.0, -(r1 + r2), r1 * r2]),
            [r] => out.push([1.0, -r, 0.0]),
            _ => unreachable!(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolve_matches_hand_expansion() {
        // (1 + z)(1 - z) = 1 - z²
        assert_eq!(convolve(&[1.0, 1.0], &[1.0, -1.0]), vec![1.0, 0.0, -1.0]);
        assert!(convolve(&[], &[1.0]).is_empty());
    }

    #[test]
    fn from_roots_conjugate_pair() {
        let r = [Complex64::new(0.0, 0.5), Complex64::new(0.0, -0.5)];
        let c = from_roots(&r);
        assert!((c[0] - 1.0).abs() < 1e-15);
        assert!(c[1].abs() < 1e-15);
        assert!((c[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn roots_of_known_quadratic() {
        // (z - 0.5)(z + 0.25) = z² - 0.25 z - 0.125
        let mut r = roots(&[1.0, -0.25, -0.125]).unwrap();
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((r[0].re + 0.25).abs() < 1e-12 && r[0].im == 0.0);
        assert!((r[1].re - 0.5).abs() < 1e-12 && r[1].im == 0.0);
    }

    #[test]
    fn quadratic_pairing_round_trips() {
        let r = [
            Complex64::new(0.3, 0.4),
            Complex64::new(0.3, -0.4),
            Complex64::new(-0.7, 0.0),
            Complex64::new(0.2, 0.0),
        ];
        let qs = pair_into_quadratics(&r);
        assert_eq!(qs.len(), 2);
        let prod = qs.iter().fold(vec![1.0], |acc, q| convolve(&acc, q));
        let direct = from_roots(&r);
        for (a, b) in prod.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
