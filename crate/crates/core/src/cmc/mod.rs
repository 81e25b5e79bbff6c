//! Radial graphs over the link, their mean curvature and its linearization,
//! the Newton solver for constant mean curvature leaves, the foliation by
//! such leaves and their Jacobi spectra.
//!
//! Graph operators are implemented for 2-dimensional links (m = 3), where
//! fields on the link are spherical-harmonic expansions.

mod foliation;
mod geometry;
mod jacobi;
mod solve;

use nalgebra::{DMatrix, DVector};

use crate::cone::{AsymptoticConeMetric, PointData};
use crate::dual::{Dual, Scalar};
use crate::link::LinkGrid;
use crate::quadrature::RadialRule;
use crate::spectral::{SpectralField, SphericalBasis, SphericalGrid};
use crate::{Error, Result};

pub use foliation::{foliate, foliate_with, Foliation, FoliationReport, Leaf, LeafFailure};
pub use jacobi::{jacobi_spectrum, JacobiSpectrum};
pub use solve::{solve_cmc, solve_cmc_with, LeafDiagnostics, SolverOptions, Target};

use geometry::{graph_point, GraphPoint};

/// The surface `{(ρ (1 + u(x)), x) : x ∈ L}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGraph {
    base_radius: f64,
    u: SpectralField,
}

impl RadialGraph {
    pub fn new(base_radius: f64, u: SpectralField) -> Result<Self> {
        if !(base_radius > 0.0 && base_radius.is_finite()) {
            return Err(Error::invalid(format!(
                "base radius must be positive, got {base_radius}"
            )));
        }
        let sup = u.sup_abs();
        if !(sup < 0.5) {
            return Err(Error::GraphRegularity(format!(
                "sup |u| = {sup} must stay below 1/2"
            )));
        }
        Ok(Self { base_radius, u })
    }

    /// The slice `{ρ} × L` as a graph with `u ≡ 0` of the given degree.
    pub fn slice(base_radius: f64, degree: usize) -> Result<Self> {
        Self::new(base_radius, SpectralField::zero(degree))
    }

    pub fn base_radius(&self) -> f64 {
        self.base_radius
    }

    pub fn u(&self) -> &SpectralField {
        &self.u
    }

    pub fn degree(&self) -> usize {
        self.u.degree()
    }

    /// sup |u| over the grid.
    pub fn sup_u(&self) -> f64 {
        self.u.sup_abs()
    }

    pub fn radius_at(&self, theta: f64, phi: f64) -> f64 {
        self.base_radius * (1.0 + self.u.eval(theta, phi))
    }

    /// `ρ (1 + u)` on the field's grid.
    pub fn radii(&self) -> Vec<f64> {
        self.u
            .values()
            .iter()
            .map(|u| self.base_radius * (1.0 + u))
            .collect()
    }

    /// The same surface written over a different base radius.
    pub fn rebased(&self, base_radius: f64) -> Result<Self> {
        let s = self.base_radius / base_radius;
        let mut coeffs: Vec<f64> = self.u.coefficients().iter().map(|c| c * s).collect();
        coeffs[0] += (s - 1.0) * (4.0 * std::f64::consts::PI).sqrt();
        Self::new(base_radius, SpectralField::from_coefficients(self.degree(), coeffs)?)
    }
}

fn require_surface_link(metric: &AsymptoticConeMetric) -> Result<()> {
    if metric.link().dim() != 2 {
        return Err(Error::Unsupported(format!(
            "graph operators need a 2-dimensional link (m = 3), link dimension is {}",
            metric.link().dim()
        )));
    }
    Ok(())
}

/// Metric data and tabulated basis on one grid, reused across evaluations.
pub(crate) struct Frame {
    pub basis: SphericalBasis,
    pub link_grid: LinkGrid,
    pub points: Vec<PointData>,
    /// `Yᵀ diag(w)`: maps grid values to coefficients.
    pub analysis: DMatrix<f64>,
}

impl Frame {
    pub fn new(metric: &AsymptoticConeMetric, degree: usize, grid: SphericalGrid) -> Self {
        let basis = SphericalBasis::new(degree, grid.clone(), true);
        let link_grid = LinkGrid::from_spherical(grid);
        let points = metric.points_on(&link_grid);
        let mut analysis = basis.y.transpose();
        for (j, mut col) in analysis.column_iter_mut().enumerate() {
            col *= link_grid.weights[j];
        }
        Self {
            basis,
            link_grid,
            points,
            analysis,
        }
    }

    pub fn solve_grid(metric: &AsymptoticConeMetric, degree: usize) -> Self {
        Self::new(metric, degree, SphericalGrid::for_degree(degree))
    }

    pub fn fine_grid(metric: &AsymptoticConeMetric, degree: usize) -> Self {
        Self::new(metric, degree, SphericalGrid::doubled(degree))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        (&self.analysis * DVector::from_column_slice(values))
            .as_slice()
            .to_vec()
    }

    /// Radii and their first and second coordinate derivatives.
    fn radial_jets(&self, rho: f64, coeffs: &[f64]) -> Vec<(f64, [f64; 2], [[f64; 2]; 2])> {
        self.basis
            .synthesize_jets(coeffs)
            .into_iter()
            .map(|j| {
                (
                    rho * (1.0 + j.value),
                    [rho * j.d_theta, rho * j.d_phi],
                    [
                        [rho * j.d_theta_theta, rho * j.d_theta_phi],
                        [rho * j.d_theta_phi, rho * j.d_phi_phi],
                    ],
                )
            })
            .collect()
    }

    fn check_inside(metric: &AsymptoticConeMetric, r: f64) -> Result<()> {
        if !(r >= metric.r_min() && r <= metric.r_max()) {
            return Err(Error::GraphRegularity(format!(
                "graph leaves the annulus [{}, {}] (r = {r})",
                metric.r_min(),
                metric.r_max()
            )));
        }
        Ok(())
    }

    /// Pointwise graph geometry at every node.
    pub fn geometry(
        &self,
        metric: &AsymptoticConeMetric,
        rho: f64,
        coeffs: &[f64],
    ) -> Result<Vec<GraphPoint<f64>>> {
        self.radial_jets(rho, coeffs)
            .into_iter()
            .zip(&self.points)
            .map(|((r, rd, rdd), p)| {
                Self::check_inside(metric, r)?;
                graph_point(&metric.jet(r, p), &p.link, rd, rdd)
            })
            .collect()
    }

    /// Mean curvature and its partial derivatives with respect to
    /// `(R, R_θ, R_φ, R_θθ, R_θφ, R_φφ)` at every node.
    pub fn linearized_mean_curvature(
        &self,
        metric: &AsymptoticConeMetric,
        rho: f64,
        coeffs: &[f64],
    ) -> Result<(Vec<f64>, Vec<[f64; 6]>)> {
        let mut values = Vec::with_capacity(self.len());
        let mut rows = Vec::with_capacity(self.len());
        for ((r, rd, rdd), p) in self.radial_jets(rho, coeffs).into_iter().zip(&self.points) {
            Self::check_inside(metric, r)?;
            let rr = Dual::<6>::variable(r, 0);
            let d1 = [Dual::variable(rd[0], 1), Dual::variable(rd[1], 2)];
            let d2 = [
                [Dual::variable(rdd[0][0], 3), Dual::variable(rdd[0][1], 4)],
                [Dual::variable(rdd[1][0], 4), Dual::variable(rdd[1][1], 5)],
            ];
            let gp = graph_point(&metric.jet(rr, p), &p.link, d1, d2)?;
            values.push(gp.mean.re());
            rows.push(gp.mean.eps);
        }
        Ok((values, rows))
    }

    /// Pointwise operator `v ↦ dH[v]` as a nodes × basis matrix, for
    /// `R = ρ(1 + u)` so that `δR = ρ v`.
    pub fn linearization_matrix(&self, rho: f64, rows: &[[f64; 6]]) -> DMatrix<f64> {
        let d = self
            .basis
            .derivatives
            .as_ref()
            .expect("frames carry derivatives");
        let mats = [&self.basis.y, &d.t, &d.p, &d.tt, &d.tp, &d.pp];
        let mut out = DMatrix::zeros(self.len(), self.basis.len());
        for (k, mat) in mats.iter().enumerate() {
            let scale = DVector::from_iterator(self.len(), rows.iter().map(|r| rho * r[k]));
            out += DMatrix::from_diagonal(&scale) * *mat;
        }
        out
    }

    /// Enclosed volume and, optionally, its gradient in the coefficients of u.
    pub fn volume(
        &self,
        metric: &AsymptoticConeMetric,
        rho: f64,
        coeffs: &[f64],
        gradient: bool,
    ) -> Result<(f64, Option<Vec<f64>>)> {
        let radii = self.basis.synthesize(coeffs);
        let rule = RadialRule::default();
        let m = metric.dim() as f64;
        let n = m - 1.0;
        let r_min = metric.r_min();
        let mut shell = 0.0;
        let mut density = Vec::with_capacity(radii.len());
        for ((u, p), w) in radii.iter().zip(&self.points).zip(&self.link_grid.weights) {
            let r = rho * (1.0 + u);
            Self::check_inside(metric, r)?;
            let part = if metric.is_exact_cone() {
                (n * p.link.psi).exp() * (r.powf(m) - r_min.powf(m)) / m
            } else {
                rule.integrate(r_min, r, |s| metric.volume_density(s, p))
            };
            shell += w * part;
            if gradient {
                density.push(w * rho * metric.volume_density(r, p));
            }
        }
        let grad = gradient.then(|| {
            (self.basis.y.transpose() * DVector::from_vec(density))
                .as_slice()
                .to_vec()
        });
        Ok((metric.core_volume() + shell, grad))
    }
}

/// Mean curvature of the graph on its grid, projected to a spectral field of
/// the graph's degree.
pub fn mean_curvature(metric: &AsymptoticConeMetric, graph: &RadialGraph) -> Result<SpectralField> {
    require_surface_link(metric)?;
    let frame = Frame::solve_grid(metric, graph.degree());
    let pts = frame.geometry(metric, graph.base_radius, graph.u.coefficients())?;
    let values: Vec<f64> = pts.iter().map(|p| p.mean).collect();
    SpectralField::from_coefficients(graph.degree(), frame.analyze(&values))
}

/// Pointwise mean curvature of the graph at the nodes of `grid`.
pub fn mean_curvature_on(
    metric: &AsymptoticConeMetric,
    graph: &RadialGraph,
    grid: &SphericalGrid,
) -> Result<Vec<f64>> {
    require_surface_link(metric)?;
    let frame = Frame::new(metric, graph.degree(), grid.clone());
    Ok(frame
        .geometry(metric, graph.base_radius, graph.u.coefficients())?
        .into_iter()
        .map(|p| p.mean)
        .collect())
}

/// Directional derivative of `u ↦ H(u)` at `graph` in direction `v`,
/// projected to the graph's degree.
pub fn linearization_apply(
    metric: &AsymptoticConeMetric,
    graph: &RadialGraph,
    v: &SpectralField,
) -> Result<SpectralField> {
    require_surface_link(metric)?;
    let degree = graph.degree();
    let frame = Frame::solve_grid(metric, degree);
    let (_, rows) =
        frame.linearized_mean_curvature(metric, graph.base_radius, graph.u.coefficients())?;
    let v = v.with_degree(degree);
    let jets = frame.basis.synthesize_jets(v.coefficients());
    let rho = graph.base_radius;
    let values: Vec<f64> = rows
        .iter()
        .zip(&jets)
        .map(|(l, j)| {
            rho * (l[0] * j.value
                + l[1] * j.d_theta
                + l[2] * j.d_phi
                + l[3] * j.d_theta_theta
                + l[4] * j.d_theta_phi
                + l[5] * j.d_phi_phi)
        })
        .collect();
    SpectralField::from_coefficients(degree, frame.analyze(&values))
}

/// Volume of the region below the graph, the core counted at its exact-cone value.
pub fn enclosed_volume(metric: &AsymptoticConeMetric, graph: &RadialGraph) -> Result<f64> {
    require_surface_link(metric)?;
    let frame = Frame::fine_grid(metric, graph.degree());
    Ok(frame
        .volume(metric, graph.base_radius, graph.u.coefficients(), false)?
        .0)
}

/// Area of the graph surface.
pub fn graph_area(metric: &AsymptoticConeMetric, graph: &RadialGraph) -> Result<f64> {
    Ok(surface_integrals(metric, graph)?.area)
}

/// Integrals over the graph surface used by the isoperimetric functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceIntegrals {
    pub area: f64,
    /// ∫ H²
    pub h_squared: f64,
    /// ∫ |h|²
    pub second_form_squared: f64,
    /// ∫ R, R the ambient scalar curvature.
    pub scalar_curvature: f64,
}

/// Area, ∫H², ∫|h|² and ∫R over the graph on the doubled grid.
pub fn surface_integrals(
    metric: &AsymptoticConeMetric,
    graph: &RadialGraph,
) -> Result<SurfaceIntegrals> {
    require_surface_link(metric)?;
    let frame = Frame::fine_grid(metric, graph.degree());
    let pts = frame.geometry(metric, graph.base_radius, graph.u.coefficients())?;
    let radii = frame.basis.synthesize(graph.u.coefficients());
    let mut out = SurfaceIntegrals {
        area: 0.0,
        h_squared: 0.0,
        second_form_squared: 0.0,
        scalar_curvature: 0.0,
    };
    for (i, p) in pts.iter().enumerate() {
        let w = frame.link_grid.weights[i] * p.area_density;
        let r = graph.base_radius * (1.0 + radii[i]);
        let coords = &frame.link_grid.coords[i];
        let scal = if metric.is_exact_cone() {
            let k = metric.link().ricci_factor_at(coords);
            2.0 * (k - 1.0) / (r * r)
        } else {
            metric.scalar_curvature(r, coords)?
        };
        out.area += w;
        out.h_squared += w * p.mean * p.mean;
        out.second_form_squared += w * p.h_sq;
        out.scalar_curvature += w * scal;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::LinkMetric;
    use std::f64::consts::PI;

    #[test]
    fn rebasing_preserves_the_surface() {
        let u = SpectralField::from_triples(6, &[(0, 0, 0.1), (2, 1, 0.05)]).unwrap();
        let g = RadialGraph::new(3.0, u).unwrap();
        let h = g.rebased(3.5).unwrap();
        for (a, b) in g.radii().iter().zip(h.radii()) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(RadialGraph::new(1.0, SpectralField::constant(4, 0.6)).is_err());
    }

    #[test]
    fn slices_of_exact_cone() {
        let m = AsymptoticConeMetric::exact(LinkMetric::scaled_sphere(2, 0.8).unwrap(), 0.5, 10.0)
            .unwrap();
        let g = RadialGraph::slice(2.0, 8).unwrap();
        let h = mean_curvature(&m, &g).unwrap();
        assert!((h.mean() - 1.0).abs() < 1e-14);
        assert!(h.values().iter().all(|v| (v - 1.0).abs() < 1e-13));
        let v = enclosed_volume(&m, &g).unwrap();
        let want = 0.64 * 4.0 * PI * 8.0 / 3.0;
        assert!((v - want).abs() < 1e-12 * want);
    }

    #[test]
    fn higher_dimensional_links_are_rejected() {
        let m = AsymptoticConeMetric::exact(LinkMetric::unit_sphere(3), 0.5, 10.0).unwrap();
        let g = RadialGraph::slice(2.0, 4).unwrap();
        assert!(matches!(mean_curvature(&m, &g), Err(Error::Unsupported(_))));
    }
}
