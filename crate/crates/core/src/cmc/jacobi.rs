//! Jacobi operator `−Δ_Σ − (|h|² + Ric(ν, ν))` of a graph leaf, discretized
//! by Galerkin projection onto the harmonics of the leaf's degree.

use nalgebra::{DMatrix, DVector};

use super::{require_surface_link, Frame, RadialGraph};
use crate::cone::AsymptoticConeMetric;
use crate::link::solve_generalized;
use crate::Result;

/// Tolerance below zero still accepted as volume-preserving stable.
pub const STABILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiSpectrum {
    /// Eigenvalues on functions with ∫_Σ f = 0, ascending.
    pub mean_zero: Vec<f64>,
    /// Eigenvalues without the constraint, ascending.
    pub unconstrained: Vec<f64>,
    pub vp_stable: bool,
}

fn scaled_rows(mat: &DMatrix<f64>, scale: &[f64]) -> DMatrix<f64> {
    let mut out = mat.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= scale[i];
    }
    out
}

/// Orthonormal basis of the complement of `m`, as columns.
fn complement(m: &DVector<f64>) -> DMatrix<f64> {
    let n = m.len();
    let norm = m.norm();
    let mut v = m.clone();
    v[0] += if m[0] >= 0.0 { norm } else { -norm };
    let vv = v.dot(&v);
    let house = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv);
    house.columns(1, n - 1).into_owned()
}

pub(crate) fn jacobi_in(
    metric: &AsymptoticConeMetric,
    frame: &Frame,
    graph: &RadialGraph,
    count: usize,
) -> Result<JacobiSpectrum> {
    let rho = graph.base_radius();
    let coeffs = graph.u().coefficients();
    let pts = frame.geometry(metric, rho, coeffs)?;
    let radii = frame.basis.synthesize(coeffs);
    let nodes = frame.len();
    let mut w = Vec::with_capacity(nodes);
    let mut d00 = Vec::with_capacity(nodes);
    let mut d01 = Vec::with_capacity(nodes);
    let mut d11 = Vec::with_capacity(nodes);
    let mut wq = Vec::with_capacity(nodes);
    for (i, p) in pts.iter().enumerate() {
        let r = rho * (1.0 + radii[i]);
        let coords = &frame.link_grid.coords[i];
        let ric_nn = if metric.is_exact_cone() {
            // Ric_C restricted to link directions is (c_L − (m − 2)) g_L.
            let s = &frame.points[i].link;
            let c = metric.link().ricci_factor_at(coords) - (metric.link().dim() as f64 - 1.0);
            let e2 = (2.0 * s.psi).exp();
            c * e2 * (s.ghat[0] * p.normal[1].powi(2) + s.ghat[1] * p.normal[2].powi(2))
        } else {
            let ric = metric.ricci_tensor(r, coords)?;
            let mut acc = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    acc += ric[a][b] * p.normal[a] * p.normal[b];
                }
            }
            acc
        };
        let dens = frame.link_grid.weights[i] * p.area_density;
        w.push(dens);
        d00.push(dens * p.gamma_inv[0][0]);
        d01.push(dens * p.gamma_inv[0][1]);
        d11.push(dens * p.gamma_inv[1][1]);
        wq.push(dens * (p.h_sq + ric_nn));
    }
    let y = &frame.basis.y;
    let d = frame.basis.derivatives.as_ref().expect("frames carry derivatives");
    let (yt, yp) = (&d.t, &d.p);
    let cross = yt.transpose() * scaled_rows(yp, &d01);
    let stiffness = yt.transpose() * scaled_rows(yt, &d00)
        + &cross
        + cross.transpose()
        + yp.transpose() * scaled_rows(yp, &d11);
    let potential = y.transpose() * scaled_rows(y, &wq);
    let mass = y.transpose() * scaled_rows(y, &w);
    let mut operator = stiffness - potential;
    operator = (&operator + operator.transpose()) * 0.5;
    let mass = (&mass + mass.transpose()) * 0.5;

    let nb = y.ncols();
    let full_count = count.clamp(1, nb);
    let (unconstrained, _) = solve_generalized(&operator, &mass, full_count)?;

    let moments = y.transpose() * DVector::from_vec(w);
    let z = complement(&moments);
    let op_z = z.transpose() * &operator * &z;
    let mass_z = z.transpose() * &mass * &z;
    let op_z = (&op_z + op_z.transpose()) * 0.5;
    let mass_z = (&mass_z + mass_z.transpose()) * 0.5;
    let (mean_zero, _) = solve_generalized(&op_z, &mass_z, count.clamp(1, nb - 1))?;
    let vp_stable = mean_zero[0] >= -STABILITY_TOL;
    Ok(JacobiSpectrum {
        mean_zero,
        unconstrained,
        vp_stable,
    })
}

/// Lowest `count` Jacobi eigenvalues of the graph, with and without the
/// mean-zero constraint.
pub fn jacobi_spectrum(
    metric: &AsymptoticConeMetric,
    graph: &RadialGraph,
    count: usize,
) -> Result<JacobiSpectrum> {
    require_surface_link(metric)?;
    if count < 2 {
        return Err(crate::Error::invalid("jacobi_spectrum needs count >= 2"));
    }
    let frame = Frame::fine_grid(metric, graph.degree());
    jacobi_in(metric, &frame, graph, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        for m in [
            DVector::from_vec(vec![3.0, 0.1, -0.2, 0.5]),
            DVector::from_vec(vec![-1.0, 2.0, 0.0, 0.0]),
        ] {
            let z = complement(&m);
            let gram = z.transpose() * &z;
            assert!((gram - DMatrix::identity(3, 3)).abs().max() < 1e-14);
            assert!((z.transpose() * &m).abs().max() < 1e-14);
        }
    }
}
