//! Gauss–Legendre rules and the graded radial integrator used for volumes.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_interval(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Composite rule on [a, b] with panels graded geometrically by `ratio`
/// (panel endpoints a, a·ratio, a·ratio², ...), suited to integrands that
/// behave like powers of r.
#[derive(Debug, Clone, Copy)]
pub struct RadialRule {
    pub points_per_panel: usize,
    pub ratio: f64,
}

impl Default for RadialRule {
    fn default() -> Self {
        Self {
            points_per_panel: 12,
            ratio: 1.5,
        }
    }
}

impl RadialRule {
    /// Roughly four times finer than the default; used as an independent oracle.
    pub fn refined() -> Self {
        Self {
            points_per_panel: 24,
            ratio: 1.1,
        }
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        if b == a {
            return 0.0;
        }
        let (sign, lo, hi) = if b > a { (1.0, a, b) } else { (-1.0, b, a) };
        let (x, w) = gauss_legendre(self.points_per_panel);
        let mut total = 0.0;
        let mut left = lo;
        while left < hi {
            let right = if lo > 0.0 {
                (left * self.ratio).min(hi)
            } else {
                hi
            };
            // Avoid a sliver panel at the end.
            let right = if hi - right < 1e-3 * (right - left) {
                hi
            } else {
                right
            };
            let half = 0.5 * (right - left);
            let mid = 0.5 * (right + left);
            total += x
                .iter()
                .zip(&w)
                .map(|(t, wt)| wt * f(mid + half * t))
                .sum::<f64>()
                * half;
            left = right;
        }
        sign * total
    }
}
