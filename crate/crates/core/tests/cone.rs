use std::f64::consts::PI;

use coniso_core::cone::{cone_ricci, AsymptoticConeMetric, Direction, Perturbation, RadialProfile};
use coniso_core::link::LinkMetric;
use coniso_core::spectral::SpectralField;
use proptest::prelude::*;

fn radial_metric(tau: f64, amplitude: f64) -> AsymptoticConeMetric {
    let alpha = Perturbation::radial(RadialProfile::Power { tau, amplitude }).unwrap();
    AsymptoticConeMetric::new(LinkMetric::unit_sphere(2), 1.0, 500.0, Some(alpha), None).unwrap()
}

/// α(r) = a r^{−τ} and α'(r).
fn alpha(tau: f64, a: f64, r: f64) -> (f64, f64) {
    (a * r.powf(-tau), -tau * a * r.powf(-tau - 1.0))
}

#[test]
fn exact_cone_volumes_and_areas() {
    let link = LinkMetric::scaled_sphere(2, 0.8).unwrap();
    let cone = AsymptoticConeMetric::exact(link.clone(), 0.5, 100.0).unwrap();
    for r in [0.7, 3.0, 40.0] {
        assert!((cone.ball_volume(r).unwrap() - link.area() * r.powi(3) / 3.0).abs() < 1e-9 * r.powi(3));
        assert!((cone.slice_area(r).unwrap() - link.area() * r * r).abs() < 1e-10 * r * r);
    }
    let s3 = AsymptoticConeMetric::exact(LinkMetric::unit_sphere(3), 0.5, 10.0).unwrap();
    let want = PI * PI / 2.0 * 16.0;
    assert!((s3.ball_volume(2.0).unwrap() - want).abs() < 1e-10);
}

#[test]
fn radial_perturbation_volume_by_direct_quadrature() {
    // vol(B_r) − vol(B_1) = 4π ∫_1^r √(1 + α) s² ds, checked with composite Simpson.
    let (tau, a) = (1.5, 0.3);
    let m = radial_metric(tau, a);
    let (r0, r1) = (1.0, 7.0);
    let n = 20000;
    let h = (r1 - r0) / n as f64;
    let f = |s: f64| (1.0 + alpha(tau, a, s).0).sqrt() * s * s;
    let mut simpson = f(r0) + f(r1);
    for i in 1..n {
        simpson += f(r0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let want = 4.0 * PI * simpson * h / 3.0;
    let got = m.ball_volume(r1).unwrap() - m.ball_volume(r0).unwrap();
    assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
}

#[test]
fn radial_perturbation_curvature_matches_warped_product() {
    // (1 + α) dr² + r² ĝ is the warped product ds² + f(s)² ĝ with f = r, so
    // Ric(∂r, ∂r) = α'/(r (1 + α)) and, per unit tangent vector,
    // Ric = α/(r² (1 + α)) + α'/(2 r (1 + α)²).
    let (tau, a) = (1.0, 0.2);
    let m = radial_metric(tau, a);
    for r in [3.0, 10.0, 60.0] {
        let (al, dal) = alpha(tau, a, r);
        let c = [1.1, 0.7];
        let rr = m
            .numeric_ricci(r, &c, &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0])
            .unwrap();
        assert!((rr - dal / (r * (1.0 + al))).abs() < 1e-7, "radial at r={r}");
        let tt = m
            .numeric_ricci(r, &c, &[0.0, 1.0, 0.0], &[0.0, 1.0, 0.0])
            .unwrap()
            / (r * r);
        let want = al / (r * r * (1.0 + al)) + dal / (2.0 * r * (1.0 + al).powi(2));
        assert!((tt - want).abs() < 1e-7, "tangent at r={r}: {tt} vs {want}");
        let mixed = m
            .numeric_ricci(r, &c, &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0])
            .unwrap();
        assert!(mixed.abs() < 1e-7);
    }
}

#[test]
fn radial_perturbation_slice_mean_curvature() {
    let (tau, a) = (2.0, 0.4);
    let m = radial_metric(tau, a);
    for r in [2.0, 9.0] {
        let want = 2.0 / (r * (1.0 + alpha(tau, a, r).0).sqrt());
        let s = m.slice_data(r).unwrap();
        for h in &s.mean_curvature {
            assert!((h - want).abs() < 1e-10);
        }
        assert!(s.umbilicity_deviation < 1e-10);
    }
}

#[test]
fn conformal_cone_tangent_ricci_is_k_minus_one() {
    let phi = SpectralField::from_triples(6, &[(0, 0, -0.2), (2, 0, 0.04), (1, -1, 0.02)]).unwrap();
    let link = LinkMetric::conformal_s2(phi).unwrap();
    let cone = AsymptoticConeMetric::exact(link.clone(), 0.5, 100.0).unwrap();
    for c in [[0.8, 0.3], [1.6, 2.2], [2.4, 5.0]] {
        let k = link.gaussian_curvature_at(c[0], c[1]);
        for r in [2.0, 20.0] {
            let dir = Direction::Tangent {
                coords: c.to_vec(),
                vector: vec![0.3, -0.8],
            };
            assert!((cone_ricci(&link, r, &dir).unwrap() - (k - 1.0) / (r * r)).abs() < 1e-12);
            let (at, x, y) = dir.chart_pair(&link, r, &c);
            assert!((cone.numeric_ricci(r, &at, &x, &y).unwrap() - (k - 1.0) / (r * r)).abs() < 1e-7);
        }
    }
}

#[test]
fn rejects_bad_annulus_and_varying_fields_on_s3() {
    assert!(AsymptoticConeMetric::exact(LinkMetric::unit_sphere(2), 2.0, 1.0).is_err());
    let field = SpectralField::from_triples(2, &[(1, 0, 1.0)]).unwrap();
    let p = Perturbation::new(
        RadialProfile::Power {
            tau: 1.0,
            amplitude: 0.1,
        },
        Some(field),
    )
    .unwrap();
    assert!(AsymptoticConeMetric::new(LinkMetric::unit_sphere(3), 1.0, 10.0, Some(p), None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn radius_for_volume_inverts_ball_volume(r in 1.5..150.0f64, amp in -0.3..0.3f64) {
        let m = radial_metric(1.0, amp);
        let v = m.ball_volume(r).unwrap();
        let back = m.radius_for_volume(v).unwrap();
        prop_assert!((back - r).abs() < 1e-10 * r);
    }

    #[test]
    fn cone_slices_scale_homothetically(r in 1.0..40.0f64, lambda in 1.1..3.0f64, rho in 0.5..1.0f64) {
        let cone = AsymptoticConeMetric::exact(LinkMetric::scaled_sphere(2, rho).unwrap(), 0.5, 200.0).unwrap();
        let (a, b) = (cone.slice_data(r).unwrap(), cone.slice_data(lambda * r).unwrap());
        for (ha, hb) in a.mean_curvature.iter().zip(&b.mean_curvature) {
            prop_assert!((lambda * hb - ha).abs() < 1e-12 * ha.abs());
        }
        prop_assert!((b.area - lambda * lambda * a.area).abs() < 1e-12 * b.area);
    }

    #[test]
    fn closed_form_ricci_agrees_with_numeric(
        r in 2.0..80.0f64, t in 0.3..2.8f64, p in 0.0..6.2f64, vx in -1.0..1.0f64, vy in -1.0..1.0f64,
    ) {
        prop_assume!(vx.abs() + vy.abs() > 0.1);
        let link = LinkMetric::scaled_sphere(2, 0.85).unwrap();
        let cone = AsymptoticConeMetric::exact(link.clone(), 0.5, 200.0).unwrap();
        let c = [t, p];
        for dir in [
            Direction::Radial,
            Direction::RadialTangentMixed,
            Direction::Tangent { coords: c.to_vec(), vector: vec![vx, vy] },
        ] {
            let (at, x, y) = dir.chart_pair(&link, r, &c);
            let numeric = cone.numeric_ricci(r, &at, &x, &y).unwrap();
            prop_assert!((numeric - cone_ricci(&link, r, &dir).unwrap()).abs() < 1e-6);
        }
    }
}
