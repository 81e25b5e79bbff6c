use std::f64::consts::PI;

use coniso_core::cmc::{
    enclosed_volume, foliate, graph_area, jacobi_spectrum, mean_curvature, solve_cmc, RadialGraph,
    Target,
};
use coniso_core::cone::{AsymptoticConeMetric, Perturbation, RadialProfile};
use coniso_core::link::LinkMetric;
use coniso_core::spectral::SpectralField;
use coniso_core::Error;
use proptest::prelude::*;

fn euclidean() -> AsymptoticConeMetric {
    AsymptoticConeMetric::exact(LinkMetric::unit_sphere(2), 0.05, 1000.0).unwrap()
}

/// The round sphere of radius `big_r` centred at `d · axis`, written as a
/// radial graph over the origin: r(x) = d (x·e) + √(R² − d² (1 − (x·e)²)).
fn shifted_sphere(big_r: f64, d: f64, axis: [f64; 3], degree: usize) -> RadialGraph {
    let norm = (axis[0].powi(2) + axis[1].powi(2) + axis[2].powi(2)).sqrt();
    let e = axis.map(|a| a / norm);
    let u = SpectralField::from_fn(degree, |t, p| {
        let x = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
        let c = x[0] * e[0] + x[1] * e[1] + x[2] * e[2];
        let r = d * c + (big_r * big_r - d * d * (1.0 - c * c)).sqrt();
        r / big_r - 1.0
    });
    RadialGraph::new(big_r, u).unwrap()
}

fn perturbed() -> AsymptoticConeMetric {
    let field = SpectralField::from_triples(2, &[(0, 0, 1.0), (1, 0, 0.5), (2, 1, 0.3)]).unwrap();
    let alpha = Perturbation::new(
        RadialProfile::Power {
            tau: 1.0,
            amplitude: 0.1,
        },
        Some(field),
    )
    .unwrap();
    AsymptoticConeMetric::new(
        LinkMetric::scaled_sphere(2, 0.8).unwrap(),
        1.0,
        200.0,
        Some(alpha),
        None,
    )
    .unwrap()
}

#[test]
fn slice_of_round_cone_has_constant_h() {
    let cone = AsymptoticConeMetric::exact(LinkMetric::scaled_sphere(2, 0.8).unwrap(), 0.5, 100.0)
        .unwrap();
    let h = mean_curvature(&cone, &RadialGraph::slice(4.0, 8).unwrap()).unwrap();
    assert!((h.max() - 0.5).abs() < 1e-13 && (h.min() - 0.5).abs() < 1e-13);
}

#[test]
fn exact_cone_solution_is_the_slice() {
    let cone = AsymptoticConeMetric::exact(LinkMetric::scaled_sphere(2, 0.8).unwrap(), 0.5, 100.0)
        .unwrap();
    let v = cone.ball_volume(6.0).unwrap();
    let start = shifted_sphere(6.0, 0.3, [0.2, 0.1, 1.0], 10);
    let (g, d) = solve_cmc(&cone, Target::Volume(v), &start).unwrap();
    assert!(g.u().sup_abs() < 1e-10);
    assert!((g.base_radius() * (1.0 + g.u().coefficient(0, 0) / (4.0 * PI).sqrt()) - 6.0).abs() < 1e-8);
    assert!(d.h_osc <= 1e-10);
}

#[test]
fn hypothesis_violation_on_the_unit_sphere_link() {
    let v = euclidean().ball_volume(5.0).unwrap();
    match foliate(&euclidean(), &[v]) {
        Err(Error::HypothesisViolation { lambda1, threshold }) => {
            assert!((lambda1 - 2.0).abs() < 1e-10);
            assert_eq!(threshold, 2.0);
        }
        other => panic!("expected a hypothesis violation, got {other:?}"),
    }
}

#[test]
fn jacobi_spectrum_of_euclidean_sphere() {
    // On a round sphere of radius R in R³ the Jacobi operator −Δ − 2/R² has
    // eigenvalues (l(l+1) − 2)/R²; the mean-zero spectrum starts at l = 1.
    let big_r = 3.0;
    let spec = jacobi_spectrum(&euclidean(), &RadialGraph::slice(big_r, 10).unwrap(), 9).unwrap();
    let want = [0.0, 0.0, 0.0, 4.0, 4.0, 4.0, 4.0, 4.0, 10.0];
    for (a, b) in spec.mean_zero.iter().zip(want) {
        assert!((a - b / (big_r * big_r)).abs() < 1e-9, "{a} vs {b}");
    }
    assert!(spec.vp_stable);
    assert!((spec.unconstrained[0] + 2.0 / (big_r * big_r)).abs() < 1e-9);
}

#[test]
fn perturbed_foliation_is_nested_and_stable() {
    let m = perturbed();
    let vols: Vec<f64> = [6.0, 9.0, 14.0]
        .iter()
        .map(|&r| m.ball_volume(r).unwrap())
        .collect();
    let f = foliate(&m, &vols).unwrap();
    assert!(f.failure.is_none());
    assert!(f.report.nested && f.report.h_decreasing && f.report.all_vp_stable);
    for (leaf, v) in f.leaves.iter().zip(&vols) {
        assert!((enclosed_volume(&m, &leaf.graph).unwrap() - v).abs() < 1e-9 * v);
        let h = mean_curvature(&m, &leaf.graph).unwrap();
        assert!(h.max() - h.min() < 1e-9);
    }
}

#[test]
fn unsupported_for_three_dimensional_links() {
    let m = AsymptoticConeMetric::exact(LinkMetric::scaled_sphere(3, 0.9).unwrap(), 1.0, 10.0).unwrap();
    assert!(matches!(
        mean_curvature(&m, &RadialGraph::slice(2.0, 4).unwrap()),
        Err(Error::Unsupported(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shifted_spheres_have_constant_mean_curvature(
        big_r in 1.0..50.0f64, shift in 0.0..0.15f64,
        ax in -1.0..1.0f64, ay in -1.0..1.0f64, az in 0.2..1.0f64,
    ) {
        let m = euclidean();
        let g = shifted_sphere(big_r, shift * big_r, [ax, ay, az], 24);
        let h = mean_curvature(&m, &g).unwrap();
        prop_assert!((h.max() - 2.0 / big_r).abs() < 1e-9 / big_r);
        prop_assert!((h.min() - 2.0 / big_r).abs() < 1e-9 / big_r);
        let area = graph_area(&m, &g).unwrap();
        prop_assert!((area - 4.0 * PI * big_r * big_r).abs() < 1e-9 * area);
        let vol = enclosed_volume(&m, &g).unwrap();
        let want = 4.0 * PI * big_r.powi(3) / 3.0;
        prop_assert!((vol - want).abs() < 1e-9 * want);
    }

    #[test]
    fn solver_is_homothety_equivariant(r in 3.0..12.0f64, lambda in 1.2..2.5f64) {
        let cone = AsymptoticConeMetric::exact(LinkMetric::scaled_sphere(2, 0.8).unwrap(), 0.5, 200.0).unwrap();
        let start = |s: f64| shifted_sphere(s, 0.05 * s, [0.3, -0.2, 1.0], 8);
        let v = cone.ball_volume(r).unwrap();
        let (g1, _) = solve_cmc(&cone, Target::Volume(v), &start(r)).unwrap();
        let (g2, _) = solve_cmc(&cone, Target::Volume(lambda.powi(3) * v), &start(lambda * r)).unwrap();
        let g2 = g2.rebased(lambda * g1.base_radius()).unwrap();
        prop_assert!(g1.u().distance(g2.u()) < 1e-10);
    }

    #[test]
    fn perturbed_leaf_is_unique_from_random_starts(seed in 0u64..1000) {
        let m = perturbed();
        let v = m.ball_volume(8.0).unwrap();
        let (reference, _) = solve_cmc(&m, Target::Volume(v), &RadialGraph::slice(8.0, 12).unwrap()).unwrap();
        let a = (seed as f64 * 0.37).sin() * 0.06;
        let b = (seed as f64 * 1.13).cos() * 0.06;
        let u0 = SpectralField::from_triples(12, &[(1, 1, a), (2, -1, b), (3, 0, 0.02)]).unwrap();
        let (g, _) = solve_cmc(&m, Target::Volume(v), &RadialGraph::new(8.0, u0).unwrap()).unwrap();
        let g = g.rebased(reference.base_radius()).unwrap();
        prop_assert!(g.u().distance(reference.u()) < 1e-9);
    }
}
