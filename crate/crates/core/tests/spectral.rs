use std::f64::consts::PI;

use coniso_core::quadrature::{gauss_legendre, gauss_legendre_interval};
use coniso_core::spectral::{basis_len, degree_order, index, SpectralField};
use proptest::prelude::*;

/// Brute-force midpoint rule on the sphere, independent of the library grids.
fn midpoint_integral(f: impl Fn(f64, f64) -> f64) -> f64 {
    let (nt, np) = (400, 400);
    let (dt, dp) = (PI / nt as f64, 2.0 * PI / np as f64);
    let mut s = 0.0;
    for i in 0..nt {
        let t = (i as f64 + 0.5) * dt;
        for j in 0..np {
            let p = (j as f64 + 0.5) * dp;
            s += f(t, p) * t.sin();
        }
    }
    s * dt * dp
}

#[test]
fn gauss_legendre_integrates_polynomials_exactly() {
    for n in 1..20 {
        let (x, w) = gauss_legendre(n);
        for k in 0..2 * n {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
            let want = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((got - want).abs() < 1e-13, "n={n} k={k}: {got} vs {want}");
        }
    }
}

#[test]
fn mapped_rule_integrates_exponential() {
    let (x, w) = gauss_legendre_interval(24, 1.0, 3.0);
    let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.exp()).sum();
    assert!((got - (3f64.exp() - 1f64.exp())).abs() < 1e-13);
}

#[test]
fn index_round_trip() {
    for idx in 0..basis_len(12) {
        let (l, k) = degree_order(idx);
        assert!(k.unsigned_abs() as usize <= l);
        assert_eq!(index(l, k), idx);
    }
}

#[test]
fn low_harmonics_match_closed_forms() {
    let c1 = (3.0 / (4.0 * PI)).sqrt();
    let y00 = SpectralField::from_triples(4, &[(0, 0, 1.0)]).unwrap();
    let y10 = SpectralField::from_triples(4, &[(1, 0, 1.0)]).unwrap();
    let y11 = SpectralField::from_triples(4, &[(1, 1, 1.0)]).unwrap();
    let y1m = SpectralField::from_triples(4, &[(1, -1, 1.0)]).unwrap();
    for &(t, p) in &[(0.3, 0.1), (1.2, 2.5), (2.9, 5.9)] {
        assert!((y00.eval(t, p) - 0.5 / PI.sqrt()).abs() < 1e-14);
        assert!((y10.eval(t, p) - c1 * f64::cos(t)).abs() < 1e-14);
        // Real harmonics of order ±1 are multiples of sin θ cos φ and sin θ sin φ.
        assert!((y11.eval(t, p).abs() - c1 * (t.sin() * p.cos()).abs()).abs() < 1e-14);
        assert!((y1m.eval(t, p).abs() - c1 * (t.sin() * p.sin()).abs()).abs() < 1e-14);
    }
}

#[test]
fn harmonics_are_orthonormal_under_independent_quadrature() {
    let modes = [(0usize, 0i64), (1, 0), (2, -1), (2, 2), (3, 1)];
    let fields: Vec<SpectralField> = modes
        .iter()
        .map(|&(l, k)| SpectralField::from_triples(3, &[(l, k, 1.0)]).unwrap())
        .collect();
    for (i, a) in fields.iter().enumerate() {
        for (j, b) in fields.iter().enumerate() {
            let ip = midpoint_integral(|t, p| a.eval(t, p) * b.eval(t, p));
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-4, "{:?} {:?}: {ip}", modes[i], modes[j]);
        }
    }
}

#[test]
fn projection_of_a_polynomial_is_exact() {
    // x² + y z restricted to S² has degree 2, so a degree-2 field holds it exactly.
    let f = |t: f64, p: f64| {
        let (x, y, z) = (t.sin() * p.cos(), t.sin() * p.sin(), t.cos());
        x * x + y * z
    };
    let field = SpectralField::from_fn(2, f);
    for &(t, p) in &[(0.4, 0.2), (1.9, 4.0), (2.7, 1.1)] {
        assert!((field.eval(t, p) - f(t, p)).abs() < 1e-13);
    }
    assert!((field.integral() - 4.0 * PI / 3.0).abs() < 1e-13);
    assert_eq!(field.effective_degree(), 2);
}

fn coefficients(degree: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, basis_len(degree))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn synthesis_analysis_round_trip(c in coefficients(6)) {
        let f = SpectralField::from_coefficients(6, c.clone()).unwrap();
        let g = SpectralField::from_fn(6, |t, p| f.eval(t, p));
        for (a, b) in g.coefficients().iter().zip(&c) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_is_diagonal(c in coefficients(5)) {
        let f = SpectralField::from_coefficients(5, c.clone()).unwrap();
        let lap = f.laplacian();
        for (idx, (a, b)) in lap.coefficients().iter().zip(&c).enumerate() {
            let (l, _) = degree_order(idx);
            prop_assert!((a + (l * (l + 1)) as f64 * b).abs() < 1e-12);
        }
        // The mean of a Laplacian vanishes.
        prop_assert!(lap.integral().abs() < 1e-12);
    }

    #[test]
    fn integral_is_the_l0_coefficient(c in coefficients(4)) {
        let f = SpectralField::from_coefficients(4, c.clone()).unwrap();
        prop_assert!((f.integral() - c[0] * (4.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn add_and_scale_are_linear(a in coefficients(3), b in coefficients(3), s in -3.0..3.0f64) {
        let fa = SpectralField::from_coefficients(3, a).unwrap();
        let fb = SpectralField::from_coefficients(3, b).unwrap();
        let lhs = fa.add(&fb).unwrap().scale(s);
        let rhs = fa.scale(s).add(&fb.scale(s)).unwrap();
        prop_assert!(lhs.distance(&rhs) < 1e-13);
    }
}
