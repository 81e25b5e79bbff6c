//! Slices `{r} × L` and weighted decay norms of `g − g_C`.

use super::{christoffel, AsymptoticConeMetric, MetricJet, PointData, RicciStencil};
use crate::link::LinkGrid;
use crate::spectral::{SpectralField, SphericalBasis};
use crate::{Error, Result};

/// Geometry of the slice `{r} × L`, sampled on the metric's quadrature grid.
#[derive(Debug, Clone)]
pub struct SliceData {
    pub r: f64,
    pub area: f64,
    pub grid: LinkGrid,
    /// Mean curvature, positive toward infinity.
    pub mean_curvature: Vec<f64>,
    /// |h|² of the second fundamental form.
    pub h_norm_sq: Vec<f64>,
    /// Induced area density against the unit round measure.
    pub area_density: Vec<f64>,
    /// sup |h − (H/(m−1)) g_Σ|_g over the grid.
    pub umbilicity_deviation: f64,
}

impl SliceData {
    /// ∫ f dA over the slice for grid samples `values`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(&self.area_density)
            .zip(&self.grid.weights)
            .map(|((v, d), w)| v * d * w)
            .sum()
    }

    fn project(&self, values: &[f64], degree: usize) -> Option<SpectralField> {
        let sg = self.grid.spherical.clone()?;
        let basis = SphericalBasis::new(degree, sg, false);
        SpectralField::from_coefficients(degree, basis.analyze(values)).ok()
    }

    /// Mean curvature as a spectral field (2-dimensional links).
    pub fn mean_curvature_field(&self, degree: usize) -> Option<SpectralField> {
        self.project(&self.mean_curvature, degree)
    }

    pub fn h_norm_sq_field(&self, degree: usize) -> Option<SpectralField> {
        self.project(&self.h_norm_sq, degree)
    }

    pub fn mean_curvature_range(&self) -> (f64, f64) {
        self.mean_curvature
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(*v), hi.max(*v))
            })
    }
}

type Tensor3 = Vec<Vec<Vec<f64>>>;

impl AsymptoticConeMetric {
    /// First and second fundamental forms of `{r} × L`. With unit normal
    /// `ν = A^{−1/2} ∂_r` the second fundamental form is `∂_r g_ij / (2√A)`.
    pub fn slice_data(&self, r: f64) -> Result<SliceData> {
        self.check_radius("radius", r)?;
        let grid = self.quadrature_grid();
        let points = self.points_on(&grid);
        let n = self.link.dim();
        let nf = n as f64;
        let mut mean_curvature = Vec::with_capacity(points.len());
        let mut h_norm_sq = Vec::with_capacity(points.len());
        let mut area_density = Vec::with_capacity(points.len());
        let mut umbilicity: f64 = 0.0;
        for p in &points {
            let jet = self.jet(r, p);
            let sa = jet.a.sqrt();
            let mut h_trace = 0.0;
            let mut h_sq = 0.0;
            let mut principal = Vec::with_capacity(n);
            for k in 0..n {
                let gamma_kk = jet.b * p.link.ghat[k];
                let h_kk = jet.b_r * p.link.ghat[k] / (2.0 * sa);
                let kappa = h_kk / gamma_kk;
                principal.push(kappa);
                h_trace += kappa;
                h_sq += kappa * kappa;
            }
            let mean = h_trace / nf;
            let dev = principal
                .iter()
                .map(|k| (k - mean).powi(2))
                .sum::<f64>()
                .sqrt();
            umbilicity = umbilicity.max(dev);
            mean_curvature.push(h_trace);
            h_norm_sq.push(h_sq);
            area_density.push(jet.b.powf(0.5 * nf));
        }
        Ok(SliceData {
            r,
            area: self.slice_area(r)?,
            grid,
            mean_curvature,
            h_norm_sq,
            area_density,
            umbilicity_deviation: umbilicity,
        })
    }

    fn cone_components(&self, r: f64, p: &PointData) -> (Vec<f64>, Vec<Vec<f64>>) {
        let e2 = (2.0 * p.link.psi).exp();
        let jet = MetricJet {
            a: 1.0,
            a_r: 0.0,
            a_x: vec![0.0; p.link.coords.len()],
            b: r * r * e2,
            b_r: 2.0 * r * e2,
            b_x: p.link.dpsi.iter().map(|d| r * r * e2 * 2.0 * d).collect(),
        };
        jet.components(&p.link)
    }

    /// Diagonal of `g − g_C` and its coordinate derivatives `dh[c][a]`.
    fn perturbation_components(&self, r: f64, p: &PointData) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = p.link.coords.len();
        let (gc, dgc) = self.cone_components(r, p);
        let (pa, pa_r) = self
            .alpha
            .as_ref()
            .map_or((0.0, 0.0), |q| (q.profile.value(r), q.profile.derivative(r)));
        let (pb, pb_r) = self
            .beta
            .as_ref()
            .map_or((0.0, 0.0), |q| (q.profile.value(r), q.profile.derivative(r)));
        let fa = &p.alpha;
        let fb = &p.beta;
        let mut h = vec![0.0; n + 1];
        let mut dh = vec![vec![0.0; n + 1]; n + 1];
        h[0] = pa * fa.value;
        dh[0][0] = pa_r * fa.value;
        for i in 0..n {
            dh[i + 1][0] = pa * fa.grad[i];
        }
        for k in 1..=n {
            let s = pb * fb.value;
            h[k] = s * gc[k];
            dh[0][k] = pb_r * fb.value * gc[k] + s * dgc[0][k];
            for i in 0..n {
                dh[i + 1][k] = pb * fb.grad[i] * gc[k] + s * dgc[i + 1][k];
            }
        }
        (h, dh)
    }

    /// `(∇_c h)_{ab}` for `h = g − g_C` with the g_C connection, plus g_C.
    fn perturbation_gradient(&self, r: f64, coords: &[f64]) -> (Tensor3, Vec<f64>, Tensor3) {
        let p = self.point(coords);
        let (gc, dgc) = self.cone_components(r, &p);
        let gamma = christoffel(&gc, &dgc);
        let (h, dh) = self.perturbation_components(r, &p);
        let m = gc.len();
        let mut t = vec![vec![vec![0.0; m]; m]; m];
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut v = if a == b { dh[c][a] } else { 0.0 };
                    v -= gamma[b][c][a] * h[b] + gamma[a][c][b] * h[a];
                    t[c][a][b] = v;
                }
            }
        }
        (t, gc, gamma)
    }

    /// `sup_L Σ_{ℓ ≤ k} r^ℓ |∇^ℓ (g − g_C)|_{g_C}` over the link grid.
    pub fn decay_norm(&self, order: usize, r: f64) -> Result<f64> {
        if order > 2 {
            return Err(Error::OutOfRange {
                what: "decay norm order",
                value: order as f64,
                lo: 0.0,
                hi: 2.0,
            });
        }
        self.check_radius("radius", r)?;
        if self.is_exact_cone() {
            return Ok(0.0);
        }
        let stencil = RicciStencil::default();
        let grid = self.link.grid();
        let mut sup: f64 = 0.0;
        for coords in &grid.coords {
            if order == 2 {
                self.check_stencil(r, coords, stencil)?;
            }
            let p = self.point(coords);
            let (gc, _) = self.cone_components(r, &p);
            let (h, _) = self.perturbation_components(r, &p);
            let m = gc.len();
            let mut total = h
                .iter()
                .zip(&gc)
                .map(|(h, g)| (h / g).powi(2))
                .sum::<f64>()
                .sqrt();
            if order >= 1 {
                let (t, gc, gamma) = self.perturbation_gradient(r, coords);
                let mut n1 = 0.0;
                for c in 0..m {
                    for a in 0..m {
                        for b in 0..m {
                            n1 += t[c][a][b].powi(2) / (gc[c] * gc[a] * gc[b]);
                        }
                    }
                }
                total += r * n1.sqrt();
                if order == 2 {
                    let n2 = self.second_derivative_norm(r, coords, &t, &gc, &gamma, stencil);
                    total += r * r * n2;
                }
            }
            sup = sup.max(total);
        }
        Ok(sup)
    }

    fn second_derivative_norm(
        &self,
        r: f64,
        coords: &[f64],
        t: &Tensor3,
        gc: &[f64],
        gamma: &Tensor3,
        stencil: RicciStencil,
    ) -> f64 {
        let m = gc.len();
        let diff = |d: usize, h: f64| -> Tensor3 {
            let eval = |sign: f64| {
                if d == 0 {
                    self.perturbation_gradient(r + sign * h, coords).0
                } else {
                    let mut x = coords.to_vec();
                    x[d - 1] += sign * h;
                    self.perturbation_gradient(r, &x).0
                }
            };
            let (plus, minus) = (eval(1.0), eval(-1.0));
            let mut out = plus;
            for c in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        out[c][a][b] = (out[c][a][b] - minus[c][a][b]) / (2.0 * h);
                    }
                }
            }
            out
        };
        let mut norm2 = 0.0;
        for d in 0..m {
            let h = if d == 0 {
                stencil.radial_rel * r
            } else {
                stencil.angular
            };
            let coarse = diff(d, h);
            let fine = diff(d, 0.5 * h);
            for c in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        let mut v = (4.0 * fine[c][a][b] - coarse[c][a][b]) / 3.0;
                        for e in 0..m {
                            v -= gamma[e][d][c] * t[e][a][b]
                                + gamma[e][d][a] * t[c][e][b]
                                + gamma[e][d][b] * t[c][a][e];
                        }
                        norm2 += v * v / (gc[d] * gc[c] * gc[a] * gc[b]);
                    }
                }
            }
        }
        norm2.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{Perturbation, RadialProfile};
    use crate::link::LinkMetric;

    #[test]
    fn exact_cone_slices_are_umbilic_with_h_over_r() {
        for (dim, r) in [(2usize, 2.0), (3, 1.0)] {
            let m = AsymptoticConeMetric::exact(LinkMetric::scaled_sphere(dim, 0.8).unwrap(), 0.5, 10.0)
                .unwrap();
            let s = m.slice_data(r).unwrap();
            for (h, q) in s.mean_curvature.iter().zip(&s.h_norm_sq) {
                assert!((h - dim as f64 / r).abs() < 1e-14);
                assert!((q - dim as f64 / (r * r)).abs() < 1e-14);
            }
            assert!(s.umbilicity_deviation <= 1e-14);
        }
    }

    #[test]
    fn slice_mean_curvature_is_first_variation_of_area() {
        // α = 0, β = 0.1/r, link-constant: H = A'(r)/A(r).
        let p = Perturbation::radial(RadialProfile::Power {
            tau: 1.0,
            amplitude: 0.1,
        })
        .unwrap();
        let m = AsymptoticConeMetric::new(LinkMetric::unit_sphere(2), 1.0, 100.0, None, Some(p))
            .unwrap();
        let r = 10.0;
        let s = m.slice_data(r).unwrap();
        let h = 1e-4;
        let da = (m.slice_area(r + h).unwrap() - m.slice_area(r - h).unwrap()) / (2.0 * h);
        let oracle = da / m.slice_area(r).unwrap();
        assert!((s.mean_curvature[0] - oracle).abs() < 1e-9);
        assert!((s.mean_curvature[0] - 0.2).abs() > 5e-4);
        assert!((s.mean_curvature[0] - 0.2).abs() < 2e-2);
    }

    #[test]
    fn decay_norm_of_pure_radial_term() {
        let c = 0.3;
        let p = Perturbation::radial(RadialProfile::Power { tau: 1.5, amplitude: c }).unwrap();
        let m = AsymptoticConeMetric::new(LinkMetric::unit_sphere(2), 1.0, 100.0, Some(p), None)
            .unwrap();
        let r: f64 = 7.0;
        assert!((m.decay_norm(0, r).unwrap() - c * r.powf(-1.5)).abs() < 1e-15);
        // For h = α dr²: (∇_r h)_rr = α', and (∇_i h)_ir = (∇_i h)_ri = −Γ^r_ii α
        // contribute α/r each in g_C norm for both link directions.
        let d1 = m.decay_norm(1, r).unwrap();
        let alpha = c * r.powf(-1.5);
        let dalpha = -1.5 * c * r.powf(-2.5);
        let expect = alpha + r * (dalpha * dalpha + 4.0 * alpha * alpha / (r * r)).sqrt();
        assert!((d1 - expect).abs() < 1e-14);
        let exact = AsymptoticConeMetric::exact(LinkMetric::unit_sphere(2), 1.0, 10.0).unwrap();
        assert_eq!(exact.decay_norm(2, 5.0).unwrap(), 0.0);
        assert!(m.decay_norm(3, r).is_err());
    }
}
