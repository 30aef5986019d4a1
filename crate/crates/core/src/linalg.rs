//! Dense real eigenvalues (balance → Hessenberg → shifted QR) and a small
//! Householder least-squares solver.
//!
//! The eigenvalue path follows the classical EISPACK `balanc`/`elmhes`/`hqr`
//! sequence. Matrices are tiny (N ≤ a few hundred), so everything works on a
//! 1-based scratch copy to keep the index arithmetic identical to the
//! textbook formulation.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Shifted-QR iterations allowed per matrix dimension before giving up.
pub const QR_SWEEPS_PER_DIM: usize = 30;

struct Mat1 {
    n: usize,
    data: Vec<f64>,
}

impl Mat1 {
    fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; (n + 1) * (n + 1)],
        }
    }

    #[inline(always)]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.n + 1) + j]
    }

    #[inline(always)]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * (self.n + 1) + j]
    }

    #[inline(always)]
    fn swap(&mut self, a: (usize, usize), b: (usize, usize)) {
        let w = self.n + 1;
        self.data.swap(a.0 * w + a.1, b.0 * w + b.1);
    }
}

/// Eigenvalues of a general real `n × n` matrix given row-major.
///
/// Real eigenvalues are returned with an imaginary part of exactly `0.0`;
/// complex ones come in adjacent conjugate pairs.
pub fn eigenvalues(matrix: &[f64], n: usize) -> Result<Vec<Complex64>> {
    if matrix.len() != n * n {
        return Err(Error::invalid(format!(
            "expected {} entries for a {n}x{n} matrix, got {}",
            n * n,
            matrix.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = Mat1::zeros(n);
    for i in 0..n {
        for j in 0..n {
            *a.at_mut(i + 1, j + 1) = matrix[i * n + j];
        }
    }
    balance(&mut a);
    reduce_to_hessenberg(&mut a);
    hessenberg_qr(a)
}

/// Roots of `c[0] zᴺ + … + c[N]` (requires `c[0] ≠ 0`) as eigenvalues of the
/// companion matrix, which is already upper Hessenberg.
pub fn companion_eigenvalues(c: &[f64]) -> Result<Vec<Complex64>> {
    let n = c.len() - 1;
    if c[0] == 0.0 {
        return Err(Error::invalid("leading coefficient must be nonzero"));
    }
    let mut a = Mat1::zeros(n);
    for j in 1..=n {
        *a.at_mut(1, j) = -c[j] / c[0];
    }
    for i in 2..=n {
        *a.at_mut(i, i - 1) = 1.0;
    }
    balance(&mut a);
    hessenberg_qr(a)
}

fn balance(a: &mut Mat1) {
    const RADIX: f64 = 2.0;
    let n = a.n;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a.at(j, i).abs();
                    r += a.at(i, j).abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        *a.at_mut(i, j) *= g;
                    }
                    for j in 1..=n {
                        *a.at_mut(j, i) *= f;
                    }
                }
            }
        }
    }
}

/// Gaussian elimination with pivoting to upper Hessenberg form.
fn reduce_to_hessenberg(a: &mut Mat1) {
    let n = a.n;
    for m in 2..n {
        let mut x: f64 = 0.0;
        let mut i = m;
        for j in m..=n {
            if a.at(j, m - 1).abs() > x.abs() {
                x = a.at(j, m - 1);
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                a.swap((i, j), (m, j));
            }
            for j in 1..=n {
                a.swap((j, i), (j, m));
            }
        }
        if x != 0.0 {
            for i in (m + 1)..=n {
                let mut y = a.at(i, m - 1);
                if y != 0.0 {
                    y /= x;
                    *a.at_mut(i, m - 1) = y;
                    for j in m..=n {
                        let v = a.at(m, j);
                        *a.at_mut(i, j) -= y * v;
                    }
                    for j in 1..=n {
                        let v = a.at(j, i);
                        *a.at_mut(j, m) += y * v;
                    }
                }
            }
        }
    }
    for i in 3..=n {
        for j in 1..(i - 1) {
            *a.at_mut(i, j) = 0.0;
        }
    }
}

#[inline]
fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
fn hessenberg_qr(mut a: Mat1) -> Result<Vec<Complex64>> {
    let n = a.n;
    let budget = QR_SWEEPS_PER_DIM * n;
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a.at(i, j).abs();
        }
    }
    let mut total_its = 0usize;
    let mut nn = n as isize;
    let mut t = 0.0;
    let (mut p, mut q, mut r): (f64, f64, f64);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0usize;
        loop {
            let nu = nn as usize;
            // Look for a single small subdiagonal element.
            let mut l = 1usize;
            let mut ll = nu;
            while ll >= 2 {
                let mut s = a.at(ll - 1, ll - 1).abs() + a.at(ll, ll).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a.at(ll, ll - 1).abs() + s == s {
                    *a.at_mut(ll, ll - 1) = 0.0;
                    l = ll;
                    break;
                }
                ll -= 1;
            }
            x = a.at(nu, nu);
            if l == nu {
                // One root found.
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
            } else {
                y = a.at(nu - 1, nu - 1);
                w = a.at(nu, nu - 1) * a.at(nu - 1, nu);
                if l == nu - 1 {
                    // Two roots found.
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[nu - 1] = x + z;
                        wr[nu] = x + z;
                        if z != 0.0 {
                            wr[nu] = x - w / z;
                        }
                        wi[nu - 1] = 0.0;
                        wi[nu] = 0.0;
                    } else {
                        wr[nu - 1] = x + p;
                        wr[nu] = x + p;
                        wi[nu - 1] = -z;
                        wi[nu] = z;
                    }
                    nn -= 2;
                } else {
                    if total_its >= budget {
                        return Err(Error::NoConvergence {
                            n,
                            iterations: total_its,
                        });
                    }
                    if its > 0 && its % 10 == 0 {
                        // Exceptional shift.
                        t += x;
                        for i in 1..=nu {
                            *a.at_mut(i, i) -= x;
                        }
                        let s = a.at(nu, nu - 1).abs() + a.at(nu - 1, nu - 2).abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    total_its += 1;
                    // Look for two consecutive small subdiagonal elements.
                    let mut m = nu - 2;
                    loop {
                        z = a.at(m, m);
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / a.at(m + 1, m) + a.at(m, m + 1);
                        q = a.at(m + 1, m + 1) - z - r - s;
                        r = a.at(m + 2, m + 1);
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a.at(m, m - 1).abs() * (q.abs() + r.abs());
                        let v = p.abs()
                            * (a.at(m - 1, m - 1).abs() + z.abs() + a.at(m + 1, m + 1).abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nu {
                        *a.at_mut(i, i - 2) = 0.0;
                        if i != m + 2 {
                            *a.at_mut(i, i - 3) = 0.0;
                        }
                    }
                    // Double QR step on rows l..nn and columns m..nn.
                    let mut k = m;
                    while k < nu {
                        if k != m {
                            p = a.at(k, k - 1);
                            q = a.at(k + 1, k - 1);
                            r = 0.0;
                            if k != nu - 1 {
                                r = a.at(k + 2, k - 1);
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    *a.at_mut(k, k - 1) = -a.at(k, k - 1);
                                }
                            } else {
                                *a.at_mut(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nu {
                                p = a.at(k, j) + q * a.at(k + 1, j);
                                if k != nu - 1 {
                                    p += r * a.at(k + 2, j);
                                    *a.at_mut(k + 2, j) -= p * z;
                                }
                                *a.at_mut(k + 1, j) -= p * y;
                                *a.at_mut(k, j) -= p * x;
                            }
                            let mmin = nu.min(k + 3);
                            for i in l..=mmin {
                                p = x * a.at(i, k) + y * a.at(i, k + 1);
                                if k != nu - 1 {
                                    p += z * a.at(i, k + 2);
                                    *a.at_mut(i, k + 2) -= p * r;
                                }
                                *a.at_mut(i, k + 1) -= p * q;
                                *a.at_mut(i, k) -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 1 || l as isize >= nn - 1 {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

/// Least-squares solution of `A x ≈ b` for a row-major `m × n` matrix with
/// `m ≥ n`, by Householder QR. Returns `None` when some pivot of `R` is at or
/// below `pivot_floor` (rank deficiency at the caller's scale).
pub fn lstsq(a: &[f64], m: usize, n: usize, b: &[f64], pivot_floor: f64) -> Option<Vec<f64>> {
    assert_eq!(a.len(), m * n);
    assert_eq!(b.len(), m);
    assert!(m >= n);
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    for k in 0..n {
        let norm = (k..m).map(|i| a[i * n + k].powi(2)).sum::<f64>().sqrt();
        if norm <= pivot_floor {
            return None;
        }
        let alpha = if a[k * n + k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| a[i * n + k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * a[i * n + j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                a[i * n + j] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i - k] * b[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in k..m {
            b[i] -= f * v[i - k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let rkk = a[k * n + k];
        if rkk.abs() <= pivot_floor {
            return None;
        }
        let s: f64 = ((k + 1)..n).map(|j| a[k * n + j] * x[j]).sum();
        x[k] = (b[k] - s) / rkk;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn companion_of_known_quadratic() {
        // (z - 0.5)(z + 0.25)
        let ev = sorted(companion_eigenvalues(&[1.0, -0.25, -0.125]).unwrap());
        assert!((ev[0].re + 0.25).abs() < 1e-10 && ev[0].im == 0.0);
        assert!((ev[1].re - 0.5).abs() < 1e-10 && ev[1].im == 0.0);
    }

    #[test]
    fn general_matrix_with_known_spectrum() {
        // Companion matrix of (z - 0.5)(z + 0.25) written out densely, and a
        // rotation-scaling block with eigenvalues 0.3 ± 0.4i.
        let ev = sorted(eigenvalues(&[0.25, 0.125, 1.0, 0.0], 2).unwrap());
        assert!((ev[0].re + 0.25).abs() < 1e-10);
        assert!((ev[1].re - 0.5).abs() < 1e-10);

        let ev = sorted(eigenvalues(&[0.3, -0.4, 0.4, 0.3], 2).unwrap());
        assert!((ev[0] - Complex64::new(0.3, -0.4)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(0.3, 0.4)).norm() < 1e-12);
    }

    #[test]
    fn triangular_and_similarity_transformed_spectra() {
        // Upper triangular: eigenvalues are the diagonal.
        let n = 6;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                m[i * n + j] = if i == j { i as f64 - 2.5 } else { 0.7 };
            }
        }
        let ev = sorted(eigenvalues(&m, n).unwrap());
        for (i, e) in ev.iter().enumerate() {
            assert!((e.re - (i as f64 - 2.5)).abs() < 1e-10, "{e}");
            assert_eq!(e.im, 0.0);
        }
    }

    #[test]
    fn trace_and_determinant_are_preserved() {
        use rand::{Rng, SeedableRng};
        use rand_distr::StandardNormal;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in [3usize, 8, 17, 40] {
            let m: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
            let ev = eigenvalues(&m, n).unwrap();
            let trace: f64 = (0..n).map(|i| m[i * n + i]).sum();
            let sum: Complex64 = ev.iter().sum();
            assert!((sum.re - trace).abs() < 1e-9 * n as f64);
            assert!(sum.im.abs() < 1e-9);
            // Each eigenvalue makes det(M - λI) vanish relative to its scale.
            for e in &ev {
                let smallest = smallest_singular_proxy(&m, n, *e);
                assert!(smallest < 1e-8, "n={n} λ={e} residual {smallest}");
            }
        }
    }

    // |det(M - λI)| / Π(column norms), a scale-free singularity measure.
    fn smallest_singular_proxy(m: &[f64], n: usize, lambda: Complex64) -> f64 {
        let mut a: Vec<Complex64> = m.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for i in 0..n {
            a[i * n + i] -= lambda;
        }
        let col_norms: f64 = (0..n)
            .map(|j| (0..n).map(|i| a[i * n + j].norm_sqr()).sum::<f64>().sqrt())
            .product();
        let mut det = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&x, &y| a[x * n + k].norm().total_cmp(&a[y * n + k].norm()))
                .unwrap();
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let d = a[k * n + k];
            det *= d;
            if d.norm() == 0.0 {
                return 0.0;
            }
            for i in (k + 1)..n {
                let f = a[i * n + k] / d;
                for j in k..n {
                    let v = a[k * n + j];
                    a[i * n + j] -= f * v;
                }
            }
        }
        det.norm() / col_norms
    }

    #[test]
    fn lstsq_recovers_exact_solution_and_flags_rank_loss() {
        // 4×2 consistent system.
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.5];
        let x_true = [0.5, -1.25];
        let b: Vec<f64> = (0..4)
            .map(|i| a[2 * i] * x_true[0] + a[2 * i + 1] * x_true[1])
            .collect();
        let x = lstsq(&a, 4, 2, &b, 1e-12).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] + 1.25).abs() < 1e-12);

        let zeros = [0.0; 8];
        assert!(lstsq(&zeros, 4, 2, &[0.0; 4], 1e-12).is_none());
    }
}
