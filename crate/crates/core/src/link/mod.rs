//! Link manifolds `(L, g_L)`.
//!
//! Two representations are supported: a round sphere of radius ρ in any
//! dimension (`g_L = ρ² g_{Sⁿ}`) and a conformally round 2-sphere
//! (`g_L = e^{2φ} g_{S²}` with φ a [`SpectralField`]). Both are written as
//! `g_L = e^{2ψ} ĝ` with ĝ the unit round metric in hyperspherical
//! coordinates, which is the form the ambient metric code consumes.

mod profile;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub use profile::{round_cap_profile, ConformalProfiler, ProfileEstimate, ProfileMethod};

use crate::spectral::{
    basis_len, degree_order, SpectralField, SphericalBasis, SphericalGrid, DEFAULT_DEGREE,
};
use crate::{sphere_area, Error, Result};

/// Residual target for the generalized eigenproblems.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    ScaledRoundSphere,
    ConformalSphere2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkMetric {
    kind: LinkKind,
    dim: usize,
    radius: f64,
    conformal_factor: Option<SpectralField>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciBound {
    /// Largest c with Ric_L ≥ c g_L (grid minimum for conformal links).
    pub value: f64,
    /// m − 2.
    pub threshold: f64,
    /// Set when `value < threshold`: the curvature hypothesis on the link fails.
    pub warning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LichnerowiczReport {
    pub ricci_bound: f64,
    pub lambda1: f64,
    /// m − 1.
    pub threshold: f64,
    pub passes: bool,
    /// Ric_L ≥ (m − 2) g_L and area(L) < ω_{m−1}.
    pub hypotheses_hold: bool,
}

/// A point of the link with the data the ambient metric needs there.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSample {
    pub coords: Vec<f64>,
    /// Log of the conformal factor against the unit round metric.
    pub psi: f64,
    pub dpsi: Vec<f64>,
    /// Diagonal of the unit round metric ĝ in hyperspherical coordinates.
    pub ghat: Vec<f64>,
    /// `dghat[c][k] = ∂_c ĝ_kk`.
    pub dghat: Vec<Vec<f64>>,
}

/// Quadrature nodes on the link, weights for the unit round measure.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGrid {
    pub dim: usize,
    pub coords: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Present for two-dimensional links.
    pub spherical: Option<SphericalGrid>,
}

impl LinkGrid {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Grid for a link of dimension `dim`. In dimension 2 this is the
    /// spherical-harmonic grid for `degree`; elsewhere only link-constant
    /// data is supported and a small interior sample suffices.
    pub fn new(dim: usize, degree: usize) -> Self {
        if dim == 2 {
            let g = SphericalGrid::for_degree(degree);
            return Self::from_spherical(g);
        }
        let mut coords = Vec::new();
        if dim == 1 {
            for j in 0..8 {
                coords.push(vec![2.0 * PI * (j as f64 + 0.5) / 8.0]);
            }
        } else {
            let polar = [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
            let azimuth = [0.3, 1.9, 3.5, 5.1];
            let mut idx = vec![0usize; dim - 1];
            loop {
                for &az in &azimuth {
                    let mut c: Vec<f64> = idx.iter().map(|&i| polar[i]).collect();
                    c.push(az);
                    coords.push(c);
                }
                let mut carry = true;
                for slot in idx.iter_mut() {
                    if carry {
                        *slot += 1;
                        carry = *slot == polar.len();
                        if carry {
                            *slot = 0;
                        }
                    }
                }
                if carry {
                    break;
                }
            }
        }
        let w = sphere_area(dim) / coords.len() as f64;
        Self {
            dim,
            weights: vec![w; coords.len()],
            coords,
            spherical: None,
        }
    }

    pub fn from_spherical(g: SphericalGrid) -> Self {
        let coords = (0..g.len())
            .map(|i| {
                let (t, p) = g.node(i);
                vec![t, p]
            })
            .collect();
        Self {
            dim: 2,
            weights: g.weights(),
            coords,
            spherical: Some(g),
        }
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// Unit round metric on Sⁿ in hyperspherical coordinates
/// `(χ_1, …, χ_{n−1}, φ)`: `ĝ_kk = Π_{j<k} sin² χ_j`.
pub(crate) fn round_metric(coords: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = coords.len();
    let mut g = vec![1.0; n];
    for k in 1..n {
        g[k] = g[k - 1] * coords[k - 1].sin().powi(2);
    }
    let mut dg = vec![vec![0.0; n]; n];
    for (c, row) in dg.iter_mut().enumerate() {
        let cot = coords[c].cos() / coords[c].sin();
        for k in (c + 1)..n {
            row[k] = 2.0 * cot * g[k];
        }
    }
    (g, dg)
}

impl LinkMetric {
    pub fn scaled_sphere(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("link dimension must be at least 1"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("sphere radius must be positive, got {radius}")));
        }
        Ok(Self {
            kind: LinkKind::ScaledRoundSphere,
            dim,
            radius,
            conformal_factor: None,
        })
    }

    pub fn unit_sphere(dim: usize) -> Self {
        Self::scaled_sphere(dim, 1.0).expect("unit sphere is valid")
    }

    pub fn conformal_s2(phi: SpectralField) -> Result<Self> {
        if phi.degree() < 4 {
            return Err(Error::invalid(format!(
                "conformal factor needs truncation degree N >= 4, got {}",
                phi.degree()
            )));
        }
        Ok(Self {
            kind: LinkKind::ConformalSphere2D,
            dim: 2,
            radius: 1.0,
            conformal_factor: Some(phi),
        })
    }

    pub fn kind(&self) -> LinkKind {
        self.kind
    }

    /// Dimension of the link, m − 1.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension m of the cone over this link.
    pub fn ambient_dim(&self) -> usize {
        self.dim + 1
    }

    pub fn radius(&self) -> Option<f64> {
        (self.kind == LinkKind::ScaledRoundSphere).then_some(self.radius)
    }

    pub fn conformal_factor(&self) -> Option<&SpectralField> {
        self.conformal_factor.as_ref()
    }

    /// Truncation degree used for fields on this link.
    pub fn degree(&self) -> usize {
        self.conformal_factor
            .as_ref()
            .map_or(DEFAULT_DEGREE, SpectralField::degree)
    }

    pub fn grid(&self) -> LinkGrid {
        LinkGrid::new(self.dim, self.degree())
    }

    /// True for the unit round sphere, the equality case of Bishop's theorem.
    pub fn is_unit_round(&self) -> bool {
        match self.kind {
            LinkKind::ScaledRoundSphere => self.radius == 1.0,
            LinkKind::ConformalSphere2D => self
                .conformal_factor
                .as_ref()
                .is_some_and(SpectralField::is_zero),
        }
    }

    /// H^{m−1}(L, g_L).
    pub fn area(&self) -> f64 {
        match &self.conformal_factor {
            None => self.radius.powi(self.dim as i32) * sphere_area(self.dim),
            Some(phi) => {
                let grid = SphericalGrid::doubled(phi.degree());
                let jets = phi.jets_on(&grid);
                let vals: Vec<f64> = jets.iter().map(|j| (2.0 * j.value).exp()).collect();
                grid.integrate(&vals)
            }
        }
    }

    /// Gaussian curvature `K = e^{−2φ}(1 − Δφ)` of a conformal link at a point.
    pub fn gaussian_curvature_at(&self, theta: f64, phi_lon: f64) -> f64 {
        match &self.conformal_factor {
            None => 1.0 / (self.radius * self.radius),
            Some(phi) => {
                let j = phi.eval_jet(theta, phi_lon);
                let lap = j.d_theta_theta
                    + theta.cos() / theta.sin() * j.d_theta
                    + j.d_phi_phi / theta.sin().powi(2);
                (-2.0 * j.value).exp() * (1.0 - lap)
            }
        }
    }

    /// Gaussian curvature on the default grid (conformal links).
    pub fn gaussian_curvature_field(&self) -> Option<Vec<f64>> {
        let phi = self.conformal_factor.as_ref()?;
        let lap = phi.laplacian();
        Some(
            phi.values()
                .iter()
                .zip(lap.values())
                .map(|(p, l)| (-2.0 * p).exp() * (1.0 - l))
                .collect(),
        )
    }

    /// The factor c(x) with Ric_L = c g_L (Einstein in both representations).
    pub fn ricci_factor_at(&self, coords: &[f64]) -> f64 {
        match self.kind {
            LinkKind::ScaledRoundSphere => (self.dim as f64 - 1.0) / (self.radius * self.radius),
            LinkKind::ConformalSphere2D => self.gaussian_curvature_at(coords[0], coords[1]),
        }
    }

    pub fn ricci_lower_bound(&self) -> RicciBound {
        let threshold = self.dim as f64 - 1.0;
        let value = match self.gaussian_curvature_field() {
            None => threshold / (self.radius * self.radius),
            Some(k) => k.into_iter().fold(f64::INFINITY, f64::min),
        };
        RicciBound {
            value,
            threshold,
            warning: value < threshold,
        }
    }

    /// Conformal factor and round metric at a point of the link.
    pub fn sample(&self, coords: &[f64]) -> LinkSample {
        debug_assert_eq!(coords.len(), self.dim);
        let (ghat, dghat) = round_metric(coords);
        let (psi, dpsi) = match &self.conformal_factor {
            None => (self.radius.ln(), vec![0.0; self.dim]),
            Some(phi) => {
                let j = phi.eval_jet(coords[0], coords[1]);
                (j.value, vec![j.d_theta, j.d_phi])
            }
        };
        LinkSample {
            coords: coords.to_vec(),
            psi,
            dpsi,
            ghat,
            dghat,
        }
    }

    /// Samples at every node of a link grid.
    pub fn sample_grid(&self, grid: &LinkGrid) -> Vec<LinkSample> {
        match (&self.conformal_factor, &grid.spherical) {
            (Some(phi), Some(sg)) => {
                let jets = phi.jets_on(sg);
                grid.coords
                    .iter()
                    .zip(jets)
                    .map(|(c, j)| {
                        let (ghat, dghat) = round_metric(c);
                        LinkSample {
                            coords: c.clone(),
                            psi: j.value,
                            dpsi: vec![j.d_theta, j.d_phi],
                            ghat,
                            dghat,
                        }
                    })
                    .collect()
            }
            _ => grid.coords.iter().map(|c| self.sample(c)).collect(),
        }
    }

    /// Multiplicity of the ℓ-th eigenvalue of the round Laplacian on Sⁿ.
    fn sphere_multiplicity(&self, l: usize) -> usize {
        let n = self.dim;
        let binom = |a: usize, b: usize| -> usize {
            if b > a {
                return 0;
            }
            (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1))
        };
        if l == 0 {
            1
        } else if l == 1 {
            n + 1
        } else {
            binom(l + n, n) - binom(l + n - 2, n)
        }
    }

    /// Lowest `count` eigenvalues of −Δ_{g_L}, ascending, with multiplicity.
    pub fn laplace_spectrum(&self, count: usize) -> Result<Vec<f64>> {
        if count < 2 {
            return Err(Error::invalid("laplace_spectrum needs count >= 2"));
        }
        match self.kind {
            LinkKind::ScaledRoundSphere => {
                let n = self.dim as f64;
                let rho2 = self.radius * self.radius;
                let mut out = Vec::with_capacity(count);
                let mut l = 0usize;
                while out.len() < count {
                    let lf = l as f64;
                    let ev = lf * (lf + n - 1.0) / rho2;
                    for _ in 0..self.sphere_multiplicity(l) {
                        if out.len() < count {
                            out.push(ev);
                        }
                    }
                    l += 1;
                }
                Ok(out)
            }
            LinkKind::ConformalSphere2D => {
                let max = basis_len(self.degree()) - 1;
                if count > max {
                    return Err(Error::OutOfRange {
                        what: "eigenvalue count",
                        value: count as f64,
                        lo: 2.0,
                        hi: max as f64,
                    });
                }
                let (values, _) = self.conformal_eigenpairs(count)?;
                Ok(values)
            }
        }
    }

    /// Galerkin eigenpairs of `−Δ_{S²}ψ = λ e^{2φ} ψ` over harmonics of degree ≤ N.
    /// Eigenfunctions are returned as fields normalized in L²(g_L).
    pub fn conformal_eigenpairs(&self, count: usize) -> Result<(Vec<f64>, Vec<SpectralField>)> {
        let phi = self
            .conformal_factor
            .as_ref()
            .ok_or_else(|| Error::invalid("eigenpairs requested for a non-conformal link"))?;
        let degree = phi.degree();
        let nb = basis_len(degree);
        // e^{2φ} Y_a Y_b is not band limited; integrate on a generously oversampled grid.
        let grid = SphericalGrid::new(2 * degree + 6, 4 * degree + 12);
        let basis = SphericalBasis::new(degree, grid, false);
        let jets = phi.jets_on(&basis.grid);
        let density: Vec<f64> = jets
            .iter()
            .enumerate()
            .map(|(i, j)| (2.0 * j.value).exp() * basis.grid.weight(i))
            .collect();
        let mut weighted = basis.y.clone();
        for (i, mut row) in weighted.row_iter_mut().enumerate() {
            row *= density[i];
        }
        let mut mass = basis.y.transpose() * weighted;
        mass = (&mass + mass.transpose()) * 0.5;
        let stiffness = DVector::from_iterator(
            nb,
            (0..nb).map(|i| {
                let (l, _) = degree_order(i);
                (l * (l + 1)) as f64
            }),
        );
        solve_generalized(&DMatrix::from_diagonal(&stiffness), &mass, count).and_then(
            |(values, vectors)| {
                let fields = vectors
                    .into_iter()
                    .map(|v| SpectralField::from_coefficients(degree, v))
                    .collect::<Result<Vec<_>>>()?;
                Ok((values, fields))
            },
        )
    }

    pub fn lambda1(&self) -> Result<f64> {
        Ok(self.laplace_spectrum(2)?[1])
    }

    pub fn lichnerowicz_check(&self) -> Result<LichnerowiczReport> {
        let ricci = self.ricci_lower_bound();
        let lambda1 = self.lambda1()?;
        let threshold = self.dim as f64;
        let passes = lambda1 > threshold + 1e-10 * threshold.max(1.0);
        let omega = sphere_area(self.dim);
        let non_round = self.area() < omega * (1.0 - 1e-10);
        let hypotheses_hold = !ricci.warning && non_round;
        if hypotheses_hold && !passes {
            return Err(Error::Consistency(format!(
                "Ric_L >= (m-2) g_L on a non-round link but lambda_1 = {lambda1} <= m - 1 = {threshold}; \
                 this contradicts the Lichnerowicz estimate and signals a discretization failure"
            )));
        }
        Ok(LichnerowiczReport {
            ricci_bound: ricci.value,
            lambda1,
            threshold,
            passes,
            hypotheses_hold,
        })
    }

    pub fn iso_profile(&self, beta: f64) -> Result<ProfileEstimate> {
        profile::iso_profile(self, beta)
    }
}

/// Lowest `count` eigenpairs of `K v = λ M v` with `M` symmetric positive definite.
/// Eigenvectors are M-orthonormal.
pub(crate) fn solve_generalized(
    stiffness: &DMatrix<f64>,
    mass: &DMatrix<f64>,
    count: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = mass.nrows();
    let chol = mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Consistency("mass matrix is not positive definite".into()))?;
    let l_inv = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::Consistency("singular Cholesky factor".into()))?;
    let mut reduced = &l_inv * stiffness * l_inv.transpose();
    reduced = (&reduced + reduced.transpose()) * 0.5;
    let eig = SymmetricEigen::new(reduced);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    let mut worst: f64 = 0.0;
    let scale = stiffness.abs().max().max(1.0);
    for &i in order.iter().take(count) {
        let lambda = eig.eigenvalues[i];
        let v = l_inv.transpose() * eig.eigenvectors.column(i);
        let res = (stiffness * &v - mass * &v * lambda).norm() / (scale + lambda.abs());
        worst = worst.max(res);
        values.push(lambda);
        vectors.push(v.as_slice().to_vec());
    }
    if worst > EIGEN_RESIDUAL_TOL {
        return Err(Error::EigenSolver { residual: worst });
    }
    Ok((values, vectors))
}
