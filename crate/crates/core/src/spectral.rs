//! Real spherical harmonics on the round unit sphere S².
//!
//! Fields are truncated expansions `f = Σ c_{ℓk} Y_{ℓk}` with `0 ≤ ℓ ≤ N`,
//! `|k| ≤ ℓ`, orthonormal in L²(S²). Sampling uses a tensor grid of
//! Gauss–Legendre nodes in cos θ and equispaced longitudes; with at least
//! `N + 1` latitudes and `2N + 2` longitudes the grid quadrature is exact
//! for products of two degree-`N` fields, so analysis after synthesis
//! returns the coefficients to rounding.
//!
//! Coordinates are colatitude θ ∈ (0, π) and longitude φ ∈ [0, 2π).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

pub const DEFAULT_DEGREE: usize = 16;

pub fn basis_len(degree: usize) -> usize {
    (degree + 1) * (degree + 1)
}

/// Flat index of `Y_{ℓk}`.
pub fn index(l: usize, k: i64) -> usize {
    debug_assert!(k.unsigned_abs() as usize <= l);
    ((l * l + l) as i64 + k) as usize
}

/// Inverse of [`index`].
pub fn degree_order(idx: usize) -> (usize, i64) {
    let l = (idx as f64).sqrt().floor() as usize;
    let l = if (l + 1) * (l + 1) <= idx { l + 1 } else { l };
    (l, idx as i64 - (l * l + l) as i64)
}

fn tri(l: usize, k: usize) -> usize {
    l * (l + 1) / 2 + k
}

/// Associated Legendre functions normalized to unit L² norm on [-1, 1],
/// with first and second colatitude derivatives.
#[derive(Debug, Clone)]
struct LegendreTable {
    p: Vec<f64>,
    dp: Vec<f64>,
    d2p: Vec<f64>,
}

impl LegendreTable {
    fn new(degree: usize, theta: f64, derivatives: bool) -> Self {
        let x = theta.cos();
        let s = theta.sin();
        let n = tri(degree, degree) + 1;
        let mut p = vec![0.0; n];
        p[0] = std::f64::consts::FRAC_1_SQRT_2;
        for k in 1..=degree {
            let kf = k as f64;
            p[tri(k, k)] = ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s * p[tri(k - 1, k - 1)];
        }
        for k in 0..degree {
            p[tri(k + 1, k)] = (2.0 * k as f64 + 3.0).sqrt() * x * p[tri(k, k)];
        }
        for k in 0..=degree {
            let kf = k as f64;
            for l in (k + 2)..=degree {
                let lf = l as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - kf * kf)).sqrt();
                let lm = lf - 1.0;
                let b = ((lm * lm - kf * kf) / (4.0 * lm * lm - 1.0)).sqrt();
                p[tri(l, k)] = a * (x * p[tri(l - 1, k)] - b * p[tri(l - 2, k)]);
            }
        }
        let (mut dp, mut d2p) = (Vec::new(), Vec::new());
        if derivatives {
            dp = vec![0.0; n];
            d2p = vec![0.0; n];
            let cot = x / s;
            for l in 0..=degree {
                let lf = l as f64;
                for k in 0..=l {
                    let kf = k as f64;
                    let lower = if l > k {
                        ((2.0 * lf + 1.0) / (2.0 * lf - 1.0) * (lf - kf) * (lf + kf)).sqrt()
                            * p[tri(l - 1, k)]
                    } else {
                        0.0
                    };
                    let i = tri(l, k);
                    dp[i] = (lf * x * p[i] - lower) / s;
                    d2p[i] = -cot * dp[i] - (lf * (lf + 1.0) - kf * kf / (s * s)) * p[i];
                }
            }
        }
        Self { p, dp, d2p }
    }
}

/// Longitudinal factors `T_k(φ)` and their first two derivatives.
fn trig(degree: usize, phi: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = 2 * degree + 1;
    let (mut t, mut dt, mut d2t) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let c0 = 1.0 / (2.0 * PI).sqrt();
    let c = 1.0 / PI.sqrt();
    t[degree] = c0;
    for k in 1..=degree {
        let kf = k as f64;
        let (sn, cs) = (kf * phi).sin_cos();
        t[degree + k] = c * cs;
        dt[degree + k] = -c * kf * sn;
        d2t[degree + k] = -kf * kf * c * cs;
        t[degree - k] = c * sn;
        dt[degree - k] = c * kf * cs;
        d2t[degree - k] = -kf * kf * c * sn;
    }
    (t, dt, d2t)
}

/// Values and coordinate derivatives of a field at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FieldJet {
    pub value: f64,
    pub d_theta: f64,
    pub d_phi: f64,
    pub d_theta_theta: f64,
    pub d_theta_phi: f64,
    pub d_phi_phi: f64,
}

/// All basis functions (and optionally their derivatives) at a point.
#[derive(Debug, Clone)]
pub struct BasisJet {
    pub y: Vec<f64>,
    pub y_t: Vec<f64>,
    pub y_p: Vec<f64>,
    pub y_tt: Vec<f64>,
    pub y_tp: Vec<f64>,
    pub y_pp: Vec<f64>,
}

pub fn basis_at(degree: usize, theta: f64, phi: f64, derivatives: bool) -> BasisJet {
    let leg = LegendreTable::new(degree, theta, derivatives);
    let (t, dt, d2t) = trig(degree, phi);
    let nb = basis_len(degree);
    let mut jet = BasisJet {
        y: vec![0.0; nb],
        y_t: Vec::new(),
        y_p: Vec::new(),
        y_tt: Vec::new(),
        y_tp: Vec::new(),
        y_pp: Vec::new(),
    };
    if derivatives {
        jet.y_t = vec![0.0; nb];
        jet.y_p = vec![0.0; nb];
        jet.y_tt = vec![0.0; nb];
        jet.y_tp = vec![0.0; nb];
        jet.y_pp = vec![0.0; nb];
    }
    for l in 0..=degree {
        for k in -(l as i64)..=(l as i64) {
            let i = index(l, k);
            let ti = (degree as i64 + k) as usize;
            let li = tri(l, k.unsigned_abs() as usize);
            jet.y[i] = leg.p[li] * t[ti];
            if derivatives {
                jet.y_t[i] = leg.dp[li] * t[ti];
                jet.y_p[i] = leg.p[li] * dt[ti];
                jet.y_tt[i] = leg.d2p[li] * t[ti];
                jet.y_tp[i] = leg.dp[li] * dt[ti];
                jet.y_pp[i] = leg.p[li] * d2t[ti];
            }
        }
    }
    jet
}

/// Gauss–Legendre × equispaced-longitude grid on S².
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalGrid {
    pub nlat: usize,
    pub nlon: usize,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    lat_weights: Vec<f64>,
}

impl SphericalGrid {
    pub fn new(nlat: usize, nlon: usize) -> Self {
        let (x, w) = gauss_legendre(nlat);
        Self {
            nlat,
            nlon,
            theta: x.iter().map(|x| x.acos()).collect(),
            phi: (0..nlon)
                .map(|j| 2.0 * PI * j as f64 / nlon as f64)
                .collect(),
            lat_weights: w,
        }
    }

    /// `(N + 1) × (2N + 2)`, the smallest exact grid for degree `N`.
    pub fn for_degree(degree: usize) -> Self {
        Self::new(degree + 1, 2 * degree + 2)
    }

    /// Twice the default resolution in each direction.
    pub fn doubled(degree: usize) -> Self {
        Self::new(2 * degree + 2, 4 * degree + 4)
    }

    pub fn len(&self) -> usize {
        self.nlat * self.nlon
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(θ, φ)` of node `i` (latitude-major ordering).
    pub fn node(&self, i: usize) -> (f64, f64) {
        (self.theta[i / self.nlon], self.phi[i % self.nlon])
    }

    /// Quadrature weight of node `i` for the round area measure.
    pub fn weight(&self, i: usize) -> f64 {
        self.lat_weights[i / self.nlon] * 2.0 * PI / self.nlon as f64
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.weight(i))
            .sum()
    }
}

/// Basis functions tabulated on a grid: rows are nodes, columns basis indices.
#[derive(Debug, Clone)]
pub struct SphericalBasis {
    pub degree: usize,
    pub grid: SphericalGrid,
    pub y: DMatrix<f64>,
    pub derivatives: Option<BasisDerivatives>,
}

#[derive(Debug, Clone)]
pub struct BasisDerivatives {
    pub t: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub tt: DMatrix<f64>,
    pub tp: DMatrix<f64>,
    pub pp: DMatrix<f64>,
}

impl SphericalBasis {
    pub fn new(degree: usize, grid: SphericalGrid, derivatives: bool) -> Self {
        let nb = basis_len(degree);
        let nodes = grid.len();
        let mut y = DMatrix::zeros(nodes, nb);
        let mut d = derivatives.then(|| BasisDerivatives {
            t: DMatrix::zeros(nodes, nb),
            p: DMatrix::zeros(nodes, nb),
            tt: DMatrix::zeros(nodes, nb),
            tp: DMatrix::zeros(nodes, nb),
            pp: DMatrix::zeros(nodes, nb),
        });
        for (ilat, &theta) in grid.theta.iter().enumerate() {
            let leg = LegendreTable::new(degree, theta, derivatives);
            for (ilon, &phi) in grid.phi.iter().enumerate() {
                let row = ilat * grid.nlon + ilon;
                let (t, dt, d2t) = trig(degree, phi);
                for l in 0..=degree {
                    for k in -(l as i64)..=(l as i64) {
                        let col = index(l, k);
                        let ti = (degree as i64 + k) as usize;
                        let li = tri(l, k.unsigned_abs() as usize);
                        y[(row, col)] = leg.p[li] * t[ti];
                        if let Some(d) = d.as_mut() {
                            d.t[(row, col)] = leg.dp[li] * t[ti];
                            d.p[(row, col)] = leg.p[li] * dt[ti];
                            d.tt[(row, col)] = leg.d2p[li] * t[ti];
                            d.tp[(row, col)] = leg.dp[li] * dt[ti];
                            d.pp[(row, col)] = leg.p[li] * d2t[ti];
                        }
                    }
                }
            }
        }
        Self {
            degree,
            grid,
            y,
            derivatives: d,
        }
    }

    pub fn len(&self) -> usize {
        self.y.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        (&self.y * DVector::from_column_slice(coeffs))
            .as_slice()
            .to_vec()
    }

    /// Quadrature projection of grid values onto the basis.
    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let weighted =
            DVector::from_iterator(values.len(), values.iter().enumerate().map(|(i, v)| v * self.grid.weight(i)));
        (self.y.transpose() * weighted).as_slice().to_vec()
    }

    /// Value and coordinate derivatives of the expansion at every node.
    pub fn synthesize_jets(&self, coeffs: &[f64]) -> Vec<FieldJet> {
        let c = DVector::from_column_slice(coeffs);
        let d = self
            .derivatives
            .as_ref()
            .expect("basis built without derivatives");
        let v = &self.y * &c;
        let t = &d.t * &c;
        let p = &d.p * &c;
        let tt = &d.tt * &c;
        let tp = &d.tp * &c;
        let pp = &d.pp * &c;
        (0..self.grid.len())
            .map(|i| FieldJet {
                value: v[i],
                d_theta: t[i],
                d_phi: p[i],
                d_theta_theta: tt[i],
                d_theta_phi: tp[i],
                d_phi_phi: pp[i],
            })
            .collect()
    }
}

/// Scalar field on S² stored as harmonic coefficients plus its samples on
/// the default grid for its degree.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    degree: usize,
    coeffs: Vec<f64>,
    grid: SphericalGrid,
    values: Vec<f64>,
}

impl SpectralField {
    pub fn from_coefficients(degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis_len(degree) {
            return Err(Error::invalid(format!(
                "degree {degree} needs {} coefficients, got {}",
                basis_len(degree),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite spectral coefficient"));
        }
        let grid = SphericalGrid::for_degree(degree);
        let values = SphericalBasis::new(degree, grid.clone(), false).synthesize(&coeffs);
        Ok(Self {
            degree,
            coeffs,
            grid,
            values,
        })
    }

    /// Builds a field from `(ℓ, k, value)` triples; unspecified coefficients are zero.
    pub fn from_triples(degree: usize, triples: &[(usize, i64, f64)]) -> Result<Self> {
        let mut coeffs = vec![0.0; basis_len(degree)];
        for &(l, k, v) in triples {
            if l > degree || k.unsigned_abs() as usize > l {
                return Err(Error::invalid(format!(
                    "coefficient ({l}, {k}) outside degree {degree}"
                )));
            }
            coeffs[index(l, k)] += v;
        }
        Self::from_coefficients(degree, coeffs)
    }

    pub fn zero(degree: usize) -> Self {
        Self::constant(degree, 0.0)
    }

    pub fn constant(degree: usize, value: f64) -> Self {
        let mut coeffs = vec![0.0; basis_len(degree)];
        coeffs[0] = value * (4.0 * PI).sqrt();
        Self::from_coefficients(degree, coeffs).expect("constant field is well formed")
    }

    /// L² projection of `f(θ, φ)` using the doubled grid.
    pub fn from_fn(degree: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let basis = SphericalBasis::new(degree, SphericalGrid::doubled(degree), false);
        let values: Vec<f64> = (0..basis.grid.len())
            .map(|i| {
                let (t, p) = basis.grid.node(i);
                f(t, p)
            })
            .collect();
        Self::from_coefficients(degree, basis.analyze(&values))
            .expect("projection has the right length")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficient(&self, l: usize, k: i64) -> f64 {
        if l > self.degree {
            0.0
        } else {
            self.coeffs[index(l, k)]
        }
    }

    pub fn grid(&self) -> &SphericalGrid {
        &self.grid
    }

    /// Samples on the default grid for this degree.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Re-expands at a different truncation degree (zero-padding or truncating).
    pub fn with_degree(&self, degree: usize) -> Self {
        let mut coeffs = vec![0.0; basis_len(degree)];
        let n = coeffs.len().min(self.coeffs.len());
        coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        Self::from_coefficients(degree, coeffs).expect("resized field is well formed")
    }

    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        let jet = basis_at(self.degree, theta, phi, false);
        dot(&jet.y, &self.coeffs)
    }

    pub fn eval_jet(&self, theta: f64, phi: f64) -> FieldJet {
        let b = basis_at(self.degree, theta, phi, true);
        FieldJet {
            value: dot(&b.y, &self.coeffs),
            d_theta: dot(&b.y_t, &self.coeffs),
            d_phi: dot(&b.y_p, &self.coeffs),
            d_theta_theta: dot(&b.y_tt, &self.coeffs),
            d_theta_phi: dot(&b.y_tp, &self.coeffs),
            d_phi_phi: dot(&b.y_pp, &self.coeffs),
        }
    }

    /// Jets at every node of `grid`; the field's own degree is used.
    pub fn jets_on(&self, grid: &SphericalGrid) -> Vec<FieldJet> {
        let mut out = Vec::with_capacity(grid.len());
        for &theta in &grid.theta {
            let leg = LegendreTable::new(self.degree, theta, true);
            for &phi in &grid.phi {
                let (t, dt, d2t) = trig(self.degree, phi);
                let mut jet = FieldJet::default();
                for l in 0..=self.degree {
                    for k in -(l as i64)..=(l as i64) {
                        let c = self.coeffs[index(l, k)];
                        if c == 0.0 {
                            continue;
                        }
                        let ti = (self.degree as i64 + k) as usize;
                        let li = tri(l, k.unsigned_abs() as usize);
                        jet.value += c * leg.p[li] * t[ti];
                        jet.d_theta += c * leg.dp[li] * t[ti];
                        jet.d_phi += c * leg.p[li] * dt[ti];
                        jet.d_theta_theta += c * leg.d2p[li] * t[ti];
                        jet.d_theta_phi += c * leg.dp[li] * dt[ti];
                        jet.d_phi_phi += c * leg.p[li] * d2t[ti];
                    }
                }
                out.push(jet);
            }
        }
        out
    }

    /// Round-sphere Laplacian Δ_{S²}.
    pub fn laplacian(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let (l, _) = degree_order(i);
                -((l * (l + 1)) as f64) * c
            })
            .collect();
        Self::from_coefficients(self.degree, coeffs).expect("same length")
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_coefficients(self.degree, self.coeffs.iter().map(|c| c * s).collect())
            .expect("same length")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.degree != self.degree {
            return Err(Error::invalid("degree mismatch in field addition"));
        }
        Self::from_coefficients(
            self.degree,
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        )
    }

    /// ∫_{S²} f dA for the round measure.
    pub fn integral(&self) -> f64 {
        self.coeffs[0] * (4.0 * PI).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0] / (4.0 * PI).sqrt()
    }

    /// Maximum of |f| over the default grid.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    /// Nonzero coefficients as `(ℓ, k, value)`.
    pub fn triples(&self) -> Vec<(usize, i64, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| {
                let (l, k) = degree_order(i);
                (l, k, *c)
            })
            .collect()
    }

    /// Largest ℓ with a nonzero coefficient.
    pub fn effective_degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c != 0.0)
            .map(|i| degree_order(i).0)
            .unwrap_or(0)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0.0);
                let b = other.coeffs.get(i).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
