use std::collections::HashMap;
use std::f64::consts::PI;

use iirnet::dsp::{make_grid, section_response_db};
use iirnet::randfilt::stats::{
    disk_root_moduli, family_a_annulus_fraction, family_a_mean_real_roots, gaussian_eigen_stats,
    kac_real_root_estimate, ks_statistic, quadratic_real_root_fraction, real_eigenvalue_estimate,
};
use iirnet::randfilt::{
    draw_rng, draw_target, sample_family_b, sample_family_c, sample_family_f, sample_family_g,
    target_response, FamilyId, RadialLaw, RandomFilterSpec, SamplerConfig, Stream, TargetFilter,
};

/// Expected real zeros of a degree-`n` Kac polynomial, by quadrature of the
/// Kac density. The four intervals (±[0,1], ±[1,∞)) contribute equally.
fn kac_expected_real_roots(n: usize) -> f64 {
    let n1 = (n + 1) as f64;
    let density = |x: f64| {
        let a = 1.0 / (x * x - 1.0).powi(2);
        let x2n = x.powi(2 * n as i32);
        let b = n1 * n1 * x2n / (x2n * x * x - 1.0).powi(2);
        (a - b).max(0.0).sqrt() / PI
    };
    let cut = 1.0 - 1e-4;
    let steps = 400_000;
    let h = cut / steps as f64;
    let body: f64 = (0..steps).map(|i| density((i as f64 + 0.5) * h)).sum::<f64>() * h;
    let at_one = ((n as f64) * (n as f64 + 2.0) / 12.0).sqrt() / PI;
    4.0 * (body + at_one * (1.0 - cut))
}

/// Exact mean number of real eigenvalues of an `n × n` real Ginibre matrix.
fn edelman_expected_real(n: usize) -> f64 {
    // Ratio (2m-1)!!/(2m)!! built incrementally.
    let ratio = |m: usize| (1..=m).fold(1.0, |acc, j| acc * (2 * j - 1) as f64 / (2 * j) as f64);
    if n % 2 == 0 {
        std::f64::consts::SQRT_2 * (0..n / 2).map(|k| ratio(2 * k)).sum::<f64>()
    } else {
        1.0 + std::f64::consts::SQRT_2 * (1..=(n - 1) / 2).map(|k| ratio(2 * k - 1)).sum::<f64>()
    }
}

#[test]
fn oracles_agree_with_known_small_cases() {
    assert!((edelman_expected_real(2) - 2f64.sqrt()).abs() < 1e-12);
    assert!((edelman_expected_real(1) - 1.0).abs() < 1e-12);
    // Degree 1: the single root is always real.
    assert!((kac_expected_real_roots(1) - 1.0).abs() < 1e-3);
    assert!((kac_expected_real_roots(32) - kac_real_root_estimate(32)).abs() < 0.2);
}

#[test]
fn family_b_real_root_fraction() {
    let f = quadratic_real_root_fraction(10_000_000, 1);
    assert!((f - 0.648).abs() < 0.003, "{f}");
}

#[test]
fn family_a_real_roots_track_kac() {
    let m = family_a_mean_real_roots(32, 20_000, 5).unwrap();
    assert!((m - kac_real_root_estimate(32)).abs() < 0.2, "{m}");
    assert!((m - kac_expected_real_roots(32)).abs() < 0.06, "{m}");
}

#[test]
fn family_a_roots_concentrate_on_unit_circle() {
    // Reference fractions from numpy.roots on independent draws.
    let f32_ = family_a_annulus_fraction(32, 10_000, 6, 0.8, 1.25).unwrap();
    assert!((f32_ - 0.8776).abs() < 0.005, "{f32_}");
    let f128 = family_a_annulus_fraction(128, 1_000, 7, 0.8, 1.25).unwrap();
    assert!((f128 - 0.9693).abs() < 0.005, "{f128}");
}

#[test]
fn disk_radial_laws() {
    let c = disk_root_moduli(RadialLaw::AreaUniform, 1_000_000, 8);
    let d = disk_root_moduli(RadialLaw::MagnitudeUniform, 1_000_000, 9);
    let ks_c = ks_statistic(&c, |r| r * r);
    let ks_d = ks_statistic(&d, |r| r);
    assert!(ks_c < 0.002 && ks_d < 0.002, "{ks_c} {ks_d}");
    let near = |v: &[f64]| v.iter().filter(|r| **r < 0.25).count() as f64 / v.len() as f64;
    let (fc, fd) = (near(&c), near(&d));
    assert!((fc - 0.0625).abs() < 0.002 && (fd - 0.25).abs() < 0.002, "{fc} {fd}");
}

#[test]
fn family_c_has_no_real_roots() {
    for i in 0..1000 {
        let mut rng = draw_rng(1, Stream::Generate, i, 0);
        let c = sample_family_c(32, &mut rng).unwrap();
        assert!(c.poles.iter().chain(&c.zeros).all(|r| r.im != 0.0));
    }
}

#[test]
fn gaussian_eigenvalues_match_exact_counts_and_fill_disk() {
    let s = gaussian_eigen_stats(64, 2000, 10, 0.5, 1.3).unwrap();
    assert!(s.fraction_inside >= 0.99, "{}", s.fraction_inside);
    assert!((s.mean_real - real_eigenvalue_estimate(64)).abs() < 0.1 * real_eigenvalue_estimate(64));
    assert!((s.mean_real - edelman_expected_real(64)).abs() < 0.15, "{}", s.mean_real);
    let s16 = gaussian_eigen_stats(16, 2000, 11, 0.5, 1.3).unwrap();
    assert!((s16.mean_real - edelman_expected_real(16)).abs() < 0.1, "{}", s16.mean_real);
}

fn section_stable(a: [f64; 3]) -> bool {
    let (a1, a2) = (a[1] / a[0], a[2] / a[0]);
    a2.abs() < 1.0 && a1.abs() < 1.0 + a2
}

#[test]
fn parametric_eq_sections_are_stable() {
    let cfg = SamplerConfig::default();
    for i in 0..100_000 {
        let mut rng = draw_rng(12, Stream::Generate, i, 0);
        let order = 4 + 2 * (i as usize % 7);
        let f = sample_family_f(order, &cfg, &mut rng).unwrap();
        let sections = f.sections.as_ref().unwrap();
        assert_eq!(sections.len(), order / 2);
        assert!(sections.iter().all(|s| section_stable(s.a)), "draw {i}");
    }
}

#[test]
fn mixture_selects_families_uniformly() {
    let cfg = SamplerConfig::default();
    let mut counts: HashMap<FamilyId, usize> = HashMap::new();
    for i in 0..60_000 {
        let mut rng = draw_rng(13, Stream::Generate, i, 0);
        let (fam, _) = sample_family_g(4, &cfg, &mut rng).unwrap();
        *counts.entry(fam).or_default() += 1;
    }
    assert_eq!(counts.len(), 6);
    for (fam, n) in counts {
        assert!((9_600..=10_400).contains(&n), "{fam}: {n}");
    }
}

#[test]
fn mixture_responses_are_finite() {
    let grid = make_grid(512, 44100.0).unwrap();
    let cfg = SamplerConfig::default();
    let spec = RandomFilterSpec::new(FamilyId::G, 8, 14).unwrap();
    for i in 0..20_000 {
        let d = draw_target(&spec, &cfg, Stream::Generate, i, &grid).unwrap();
        assert!(d.response.is_finite());
        assert_eq!(d.filter.order(), 8);
    }
}

#[test]
fn family_b_response_is_sum_of_sections() {
    let grid = make_grid(512, 44100.0).unwrap();
    let mut rng = draw_rng(15, Stream::Generate, 0, 0);
    let f = sample_family_b(16, &mut rng).unwrap();
    let whole = target_response(&TargetFilter::Coefficients(f.clone()), &grid).unwrap();
    let mut sum = vec![0.0; grid.len()];
    for s in f.sections.as_ref().unwrap() {
        let r = section_response_db(s, &grid).unwrap();
        sum.iter_mut().zip(&r.values_db).for_each(|(a, b)| *a += b);
    }
    for (a, b) in whole.values_db.iter().zip(&sum) {
        assert!((a - b).abs() < 1e-9, "{a} {b}");
    }
}

#[test]
fn expanded_filters_have_real_even_order() {
    let cfg = SamplerConfig::default();
    for fam in FamilyId::ALL {
        for i in 0..50 {
            let mut rng = draw_rng(16, Stream::Generate, i, 0);
            let (_, f) = iirnet::randfilt::sample(fam, 8, &cfg, &mut rng).unwrap();
            let c = f.to_coefficients();
            assert_eq!(c.numerator.len(), 9);
            assert_eq!(c.denominator.len(), 9);
            assert!(c.numerator.iter().chain(&c.denominator).all(|v| v.is_finite()));
        }
    }
}
