use num_complex::Complex64;

/// Keeps projected roots off the origin singularity and off the unit circle.
pub const MIN_PHASE_EPS: f64 = 1e-8;

/// Radial squashing `r ↦ (1-ε)·r·tanh|r| / (|r|+ε)`.
///
/// The output has the argument of the input and magnitude strictly below one.
pub fn min_phase_project(root: Complex64) -> Complex64 {
    root * radial_scale(root.norm())
}

#[inline]
fn radial_scale(rho: f64) -> f64 {
    (1.0 - MIN_PHASE_EPS) * rho.tanh() / (rho + MIN_PHASE_EPS)
}

#[inline]
fn radial_scale_derivative(rho: f64) -> f64 {
    let t = rho.tanh();
    let sech2 = 1.0 - t * t;
    let d = rho + MIN_PHASE_EPS;
    (1.0 - MIN_PHASE_EPS) * (sech2 * d - t) / (d * d)
}

/// Projected root together with the real 2×2 Jacobian
/// `[[∂u/∂x, ∂u/∂y], [∂v/∂x, ∂v/∂y]]` for `root = x + iy ↦ u + iv`.
pub fn min_phase_jacobian(root: Complex64) -> (Complex64, [[f64; 2]; 2]) {
    let rho = root.norm();
    let s = radial_scale(rho);
    let w = root * s;
    if rho == 0.0 {
        return (w, [[s, 0.0], [0.0, s]]);
    }
    let (x, y) = (root.re, root.im);
    let k = radial_scale_derivative(rho) / rho;
    (
        w,
        [[s + k * x * x, k * x * y], [k * x * y, s + k * y * y]],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_points_and_scalar_values() {
        assert_eq!(min_phase_project(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));

        let w = min_phase_project(Complex64::new(2.0, 0.0));
        let oracle = 2.0f64.tanh() * (1.0 - 1e-8) * 2.0 / (2.0 + 1e-8);
        assert!((w.re - oracle).abs() < 1e-15);
        assert!((w.re - 0.9640).abs() < 1e-4);
        assert_eq!(w.im, 0.0);
    }

    #[test]
    fn saturation_bound_for_huge_roots() {
        for k in 0..64 {
            let theta = k as f64 * 0.1;
            let w = min_phase_project(Complex64::from_polar(1e6, theta));
            assert!(w.norm() < 1.0 - MIN_PHASE_EPS / 2.0);
        }
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let h = 1e-6;
        for &(x, y) in &[(0.3, -0.2), (1.7, 0.4), (-0.05, 0.9), (3.0, -2.0)] {
            let (_, j) = min_phase_jacobian(Complex64::new(x, y));
            let dx = (min_phase_project(Complex64::new(x + h, y))
                - min_phase_project(Complex64::new(x - h, y)))
                / (2.0 * h);
            let dy = (min_phase_project(Complex64::new(x, y + h))
                - min_phase_project(Complex64::new(x, y - h)))
                / (2.0 * h);
            assert!((j[0][0] - dx.re).abs() < 1e-8);
            assert!((j[1][0] - dx.im).abs() < 1e-8);
            assert!((j[0][1] - dy.re).abs() < 1e-8);
            assert!((j[1][1] - dy.im).abs() < 1e-8);
        }
    }

    #[test]
    fn radial_derivative_vanishes_in_saturation() {
        // d|w|/dρ = (1-ε)[sech²ρ · ρ/(ρ+ε) + tanh ρ · ε/(ρ+ε)²]; the tanh
        // term is below 1e-15 at ρ = 20, leaving only the ε floor.
        let rho: f64 = 20.0;
        let t = rho.tanh();
        assert!(1.0 - t * t < 1e-15);
        let (_, j) = min_phase_jacobian(Complex64::new(rho, 0.0));
        assert!(j[0][0].abs() < 1e-10);
        let h = 1e-6;
        let fd = (min_phase_project(Complex64::new(rho + h, 0.0)).re
            - min_phase_project(Complex64::new(rho - h, 0.0)).re)
            / (2.0 * h);
        assert!(fd.abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn projection_is_inside_unit_disk_and_keeps_argument(
            mag in 0.0f64..1e6,
            theta in -std::f64::consts::PI..std::f64::consts::PI,
        ) {
            let r = Complex64::from_polar(mag, theta);
            let w = min_phase_project(r);
            prop_assert!(w.norm() < 1.0);
            if mag > 1e-6 {
                let d = (w.arg() - r.arg()).abs();
                prop_assert!(d < 1e-12 || (d - 2.0 * std::f64::consts::PI).abs() < 1e-12);
            }
        }
    }
}
