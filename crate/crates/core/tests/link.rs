use std::f64::consts::PI;

use coniso_core::link::{round_cap_profile, LinkMetric, ProfileMethod};
use coniso_core::spectral::SpectralField;
use coniso_core::sphere_area;
use proptest::prelude::*;

/// Eigenvalues of the unit round Sⁿ with multiplicity, ascending.
fn round_spectrum(n: usize, count: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut l = 0usize;
    while out.len() < count {
        // dim of degree-l harmonics on Sⁿ: C(l+n, n) − C(l+n−2, n).
        let choose = |a: i64, b: i64| -> i64 {
            if a < b || a < 0 {
                return 0;
            }
            (0..b).fold(1, |acc, i| acc * (a - i) / (i + 1))
        };
        let (li, ni) = (l as i64, n as i64);
        let mult = choose(li + ni, ni) - choose(li + ni - 2, ni);
        for _ in 0..mult {
            out.push((l * (l + n - 1)) as f64);
        }
        l += 1;
    }
    out.truncate(count);
    out
}

#[test]
fn round_spectra_have_closed_form() {
    for n in [2usize, 3] {
        let got = LinkMetric::unit_sphere(n).laplace_spectrum(16).unwrap();
        for (a, b) in got.iter().zip(round_spectrum(n, 16)) {
            assert!((a - b).abs() < 1e-9, "S^{n}: {a} vs {b}");
        }
    }
}

#[test]
fn constant_conformal_factor_is_a_rescaled_sphere() {
    // φ = c Y_00 is the constant c/√(4π), i.e. radius e^{c/√(4π)}.
    let c = -0.4;
    let radius = (c / (4.0 * PI).sqrt()).exp();
    let conformal = LinkMetric::conformal_s2(SpectralField::from_triples(8, &[(0, 0, c)]).unwrap())
        .unwrap();
    let round = LinkMetric::scaled_sphere(2, radius).unwrap();
    assert!((conformal.area() - 4.0 * PI * radius * radius).abs() < 1e-12);
    let (a, b) = (
        conformal.laplace_spectrum(9).unwrap(),
        round.laplace_spectrum(9).unwrap(),
    );
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-8 * y.max(1.0), "{x} vs {y}");
    }
    let k = conformal.gaussian_curvature_field().unwrap();
    for v in k {
        assert!((v - radius.powi(-2)).abs() < 1e-12);
    }
}

#[test]
fn lichnerowicz_borderline_and_strict_cases() {
    let unit = LinkMetric::unit_sphere(2).lichnerowicz_check().unwrap();
    assert!(!unit.passes);
    assert!((unit.lambda1 - 2.0).abs() < 1e-10);
    let small = LinkMetric::scaled_sphere(2, 0.8).unwrap().lichnerowicz_check().unwrap();
    assert!(small.passes && small.hypotheses_hold);
    assert!((small.lambda1 - 2.0 / 0.64).abs() < 1e-10);
    let big = LinkMetric::scaled_sphere(3, 1.2).unwrap().lichnerowicz_check().unwrap();
    assert!(!big.passes && !big.hypotheses_hold);
}

#[test]
fn round_links_have_bishop_areas() {
    for n in [2usize, 3] {
        assert!((LinkMetric::unit_sphere(n).area() - sphere_area(n)).abs() < 1e-12);
        let a = LinkMetric::scaled_sphere(n, 0.7).unwrap().area();
        assert!((a - 0.7f64.powi(n as i32) * sphere_area(n)).abs() < 1e-12);
    }
}

#[test]
fn unit_s2_profile_is_archimedes() {
    // A cap of area fraction β has boundary circle of length 2π√(1 − (1 − 2β)²).
    for k in 1..20 {
        let b = k as f64 / 20.0;
        let h = 1.0 - 2.0 * b;
        let want = 2.0 * PI * (1.0 - h * h).sqrt() / (4.0 * PI);
        assert!((round_cap_profile(2, b) - want).abs() < 1e-14);
    }
}

#[test]
fn s3_profile_matches_cap_formula() {
    // Cap of geodesic radius s in S³: volume 2π(s − sin s cos s), boundary 4π sin² s.
    for s in [0.3, 1.0, 1.7, 2.6] {
        let beta = 2.0 * PI * (s - f64::sin(s) * f64::cos(s)) / (2.0 * PI * PI);
        let want = 4.0 * PI * f64::sin(s).powi(2) / (2.0 * PI * PI);
        assert!((round_cap_profile(3, beta) - want).abs() < 1e-12);
    }
}

#[test]
fn flat_conformal_profile_recovers_the_round_one() {
    let phi = SpectralField::zero(6);
    let link = LinkMetric::conformal_s2(phi).unwrap();
    for b in [0.1, 0.5, 0.8] {
        let est = link.iso_profile(b).unwrap();
        assert!(est.is_upper_bound);
        assert_ne!(est.method, ProfileMethod::CapExact);
        assert!((est.value - (b * (1.0 - b)).sqrt()).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaled_spectrum_is_rho_minus_two(rho in 0.3..3.0f64, n in 2usize..4) {
        let unit = LinkMetric::unit_sphere(n).laplace_spectrum(10).unwrap();
        let scaled = LinkMetric::scaled_sphere(n, rho).unwrap().laplace_spectrum(10).unwrap();
        for (a, b) in scaled.iter().zip(&unit) {
            prop_assert!((a * rho * rho - b).abs() <= 1e-10 * b.max(1.0));
        }
    }

    #[test]
    fn gauss_bonnet_on_conformal_links(
        c in -0.3..0.3f64, a in -0.05..0.05f64, b in -0.05..0.05f64,
    ) {
        let phi = SpectralField::from_triples(8, &[(0, 0, c), (2, 1, a), (3, -2, b)]).unwrap();
        let link = LinkMetric::conformal_s2(phi.clone()).unwrap();
        let k = link.gaussian_curvature_field().unwrap();
        let vals: Vec<f64> = k.iter().zip(phi.values()).map(|(k, p)| k * (2.0 * p).exp()).collect();
        prop_assert!((phi.grid().integrate(&vals) - 4.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn profile_symmetric_and_scaled(beta in 0.01..0.99f64, rho in 0.4..2.5f64) {
        let unit = LinkMetric::unit_sphere(2);
        let scaled = LinkMetric::scaled_sphere(2, rho).unwrap();
        let i = unit.iso_profile(beta).unwrap().value;
        prop_assert!((i - unit.iso_profile(1.0 - beta).unwrap().value).abs() < 1e-13);
        prop_assert!((scaled.iso_profile(beta).unwrap().value * rho - i).abs() < 1e-13);
    }
}
