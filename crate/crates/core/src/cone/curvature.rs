//! Ricci curvature: the closed form on exact cones and a finite-difference
//! evaluation for arbitrary metrics in the family.

use super::AsymptoticConeMetric;
use crate::link::LinkMetric;
use crate::{Error, Result};

/// Direction argument of [`cone_ricci`].
#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    Radial,
    RadialTangentMixed,
    /// A tangent vector to the link at `coords`, given by its link
    /// components; it is rescaled to g_C-unit length.
    Tangent { coords: Vec<f64>, vector: Vec<f64> },
}

impl Direction {
    /// The pair of chart vectors `(X, Y)` at radius `r` whose Ricci pairing
    /// the direction denotes. Radial and mixed directions are placed at
    /// `coords`; the mixed pair uses the first unit link direction.
    pub fn chart_pair(
        &self,
        link: &LinkMetric,
        r: f64,
        coords: &[f64],
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let m = link.ambient_dim();
        let mut radial = vec![0.0; m];
        radial[0] = 1.0;
        match self {
            Direction::Radial => (coords.to_vec(), radial.clone(), radial),
            Direction::RadialTangentMixed => {
                let s = link.sample(coords);
                let mut t = vec![0.0; m];
                t[1] = 1.0 / (r * s.psi.exp() * s.ghat[0].sqrt());
                (coords.to_vec(), radial, t)
            }
            Direction::Tangent { coords, vector } => {
                let s = link.sample(coords);
                let norm2: f64 = vector
                    .iter()
                    .zip(&s.ghat)
                    .map(|(v, g)| v * v * g)
                    .sum::<f64>()
                    * (2.0 * s.psi).exp()
                    * r
                    * r;
                let scale = 1.0 / norm2.sqrt();
                let mut x = vec![0.0; m];
                for (k, v) in vector.iter().enumerate() {
                    x[k + 1] = v * scale;
                }
                (coords.clone(), x.clone(), x)
            }
        }
    }
}

/// Ricci curvature of the exact cone over `link` in the given direction.
///
/// Radial and mixed components vanish; on g_C-unit tangent vectors the value
/// is `(c_L(x) − (m − 2)) / r²` where `Ric_L = c_L g_L`.
pub fn cone_ricci(link: &LinkMetric, r: f64, direction: &Direction) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::invalid(format!("cone_ricci needs r > 0, got {r}")));
    }
    match direction {
        Direction::Radial | Direction::RadialTangentMixed => Ok(0.0),
        Direction::Tangent { coords, vector } => {
            if coords.len() != link.dim() || vector.len() != link.dim() {
                return Err(Error::invalid("tangent direction has the wrong dimension"));
            }
            if vector.iter().all(|v| *v == 0.0) {
                return Err(Error::invalid("tangent direction must be nonzero"));
            }
            let c = link.ricci_factor_at(coords);
            Ok((c - (link.dim() as f64 - 1.0)) / (r * r))
        }
    }
}

/// Finite-difference steps for [`AsymptoticConeMetric::ricci_tensor_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciStencil {
    /// Radial step as a fraction of r.
    pub radial_rel: f64,
    /// Step in the angular coordinates (radians).
    pub angular: f64,
    /// Combine steps h and h/2 to cancel the leading error term.
    pub richardson: bool,
}

impl Default for RicciStencil {
    fn default() -> Self {
        Self {
            radial_rel: 1e-3,
            angular: 1e-3,
            richardson: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialIdentityReport {
    /// sup |∇_Y(r ∂_r) − Y|_g over the samples.
    pub deviation: f64,
    pub exact_cone: bool,
    /// Only decided on exact cones, where the identity must hold.
    pub passes: Option<bool>,
}

type Gamma = Vec<Vec<Vec<f64>>>;

impl AsymptoticConeMetric {
    pub(crate) fn check_stencil(&self, r: f64, coords: &[f64], st: RicciStencil) -> Result<()> {
        let h = st.radial_rel * r;
        if r - 4.0 * h < self.r_min || r + 4.0 * h > self.r_max {
            return Err(Error::invalid(format!(
                "point r = {r} too close to the annulus boundary [{}, {}] for step {h}",
                self.r_min, self.r_max
            )));
        }
        let n = coords.len();
        for (k, c) in coords.iter().enumerate().take(n.saturating_sub(1)) {
            if *c < 4.0 * st.angular || *c > std::f64::consts::PI - 4.0 * st.angular {
                return Err(Error::invalid(format!(
                    "polar coordinate {k} = {c} too close to a coordinate pole"
                )));
            }
        }
        Ok(())
    }

    fn christoffel_derivative(&self, r: f64, coords: &[f64], c: usize, h: f64) -> Gamma {
        let shifted = |sign: f64| -> Gamma {
            if c == 0 {
                self.christoffel_at(r + sign * h, coords)
            } else {
                let mut x = coords.to_vec();
                x[c - 1] += sign * h;
                self.christoffel_at(r, &x)
            }
        };
        let plus = shifted(1.0);
        let minus = shifted(-1.0);
        let m = plus.len();
        let mut out = plus;
        for a in 0..m {
            for b in 0..m {
                for d in 0..m {
                    out[a][b][d] = (out[a][b][d] - minus[a][b][d]) / (2.0 * h);
                }
            }
        }
        out
    }

    /// Ricci tensor in the chart `(r, x)` at the default stencil.
    pub fn ricci_tensor(&self, r: f64, coords: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.ricci_tensor_with(r, coords, RicciStencil::default())
    }

    /// Ricci tensor from centred differences of the analytic Christoffel
    /// symbols: `R_bd = ∂_a Γ^a_bd − ∂_d Γ^a_ab + Γ^a_ae Γ^e_bd − Γ^a_de Γ^e_ab`.
    pub fn ricci_tensor_with(
        &self,
        r: f64,
        coords: &[f64],
        stencil: RicciStencil,
    ) -> Result<Vec<Vec<f64>>> {
        if coords.len() != self.link.dim() {
            return Err(Error::invalid("point has the wrong number of link coordinates"));
        }
        self.check_stencil(r, coords, stencil)?;
        let m = self.dim();
        let gamma = self.christoffel_at(r, coords);
        let mut dgamma: Vec<Gamma> = Vec::with_capacity(m);
        for c in 0..m {
            let h = if c == 0 {
                stencil.radial_rel * r
            } else {
                stencil.angular
            };
            let mut d = self.christoffel_derivative(r, coords, c, h);
            if stencil.richardson {
                let fine = self.christoffel_derivative(r, coords, c, 0.5 * h);
                for a in 0..m {
                    for b in 0..m {
                        for e in 0..m {
                            d[a][b][e] = (4.0 * fine[a][b][e] - d[a][b][e]) / 3.0;
                        }
                    }
                }
            }
            dgamma.push(d);
        }
        let mut ric = vec![vec![0.0; m]; m];
        for b in 0..m {
            for d in 0..m {
                let mut v = 0.0;
                for a in 0..m {
                    v += dgamma[a][a][b][d] - dgamma[d][a][a][b];
                    for e in 0..m {
                        v += gamma[a][a][e] * gamma[e][b][d] - gamma[a][d][e] * gamma[e][a][b];
                    }
                }
                ric[b][d] = v;
            }
        }
        // Symmetrize away the O(h⁴) asymmetry of the stencil.
        for b in 0..m {
            for d in (b + 1)..m {
                let s = 0.5 * (ric[b][d] + ric[d][b]);
                ric[b][d] = s;
                ric[d][b] = s;
            }
        }
        Ok(ric)
    }

    /// `Ric(X, Y)` for chart vectors `X`, `Y` at `(r, coords)`.
    pub fn numeric_ricci(&self, r: f64, coords: &[f64], x: &[f64], y: &[f64]) -> Result<f64> {
        let m = self.dim();
        if x.len() != m || y.len() != m {
            return Err(Error::invalid("direction vectors must have m components"));
        }
        let ric = self.ricci_tensor(r, coords)?;
        let mut v = 0.0;
        for a in 0..m {
            for b in 0..m {
                v += ric[a][b] * x[a] * y[b];
            }
        }
        Ok(v)
    }

    /// Scalar curvature by tracing the numerical Ricci tensor.
    pub fn scalar_curvature(&self, r: f64, coords: &[f64]) -> Result<f64> {
        let ric = self.ricci_tensor(r, coords)?;
        let (g, _) = self.components(r, coords);
        Ok(ric.iter().enumerate().map(|(a, row)| row[a] / g[a]).sum())
    }

    /// sup over `(r, coords, Y)` samples of `|∇_Y(r ∂_r) − Y|_g`, from the
    /// analytic Christoffel symbols of this metric.
    pub fn radial_identity_check(&self, samples: &[(f64, Vec<f64>, Vec<f64>)]) -> RadialIdentityReport {
        let m = self.dim();
        let mut worst: f64 = 0.0;
        for (r, coords, y) in samples {
            let gamma = self.christoffel_at(*r, coords);
            let (g, _) = self.components(*r, coords);
            let mut norm2 = 0.0;
            let mut ynorm2 = 0.0;
            for a in 0..m {
                let mut v = if a == 0 { y[0] } else { 0.0 };
                for (b, yb) in y.iter().enumerate() {
                    v += r * gamma[a][b][0] * yb;
                }
                let dev = v - y[a];
                norm2 += g[a] * dev * dev;
                ynorm2 += g[a] * y[a] * y[a];
            }
            worst = worst.max(norm2.sqrt() / ynorm2.sqrt().max(1.0));
        }
        let exact = self.is_exact_cone();
        RadialIdentityReport {
            deviation: worst,
            exact_cone: exact,
            passes: exact.then_some(worst <= 1e-10),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{Perturbation, RadialProfile};
    use crate::spectral::SpectralField;

    #[test]
    fn closed_form_values() {
        let link = LinkMetric::scaled_sphere(2, 0.8).unwrap();
        let t = Direction::Tangent {
            coords: vec![1.0, 2.0],
            vector: vec![0.3, 0.1],
        };
        assert!((cone_ricci(&link, 2.0, &t).unwrap() - 0.140625).abs() < 1e-15);
        assert_eq!(cone_ricci(&link, 2.0, &Direction::Radial).unwrap(), 0.0);
        assert!(cone_ricci(&link, 0.0, &Direction::Radial).is_err());
        let flat = LinkMetric::unit_sphere(2);
        assert_eq!(cone_ricci(&flat, 3.0, &t).unwrap(), 0.0);
    }

    #[test]
    fn numeric_matches_closed_form_on_scaled_sphere() {
        let link = LinkMetric::scaled_sphere(2, 0.8).unwrap();
        let m = AsymptoticConeMetric::exact(link.clone(), 0.5, 10.0).unwrap();
        let coords = [1.1, 0.4];
        for dir in [
            Direction::Radial,
            Direction::RadialTangentMixed,
            Direction::Tangent {
                coords: coords.to_vec(),
                vector: vec![0.2, 0.7],
            },
        ] {
            let (c, x, y) = dir.chart_pair(&link, 2.0, &coords);
            let num = m.numeric_ricci(2.0, &c, &x, &y).unwrap();
            let exact = cone_ricci(&link, 2.0, &dir).unwrap();
            assert!((num - exact).abs() < 1e-8, "{dir:?}: {num} vs {exact}");
        }
    }

    #[test]
    fn scalar_curvature_of_conformal_cone() {
        let phi = SpectralField::from_triples(8, &[(2, 0, 0.05), (1, 1, -0.03)]).unwrap();
        let link = LinkMetric::conformal_s2(phi).unwrap();
        let m = AsymptoticConeMetric::exact(link.clone(), 0.5, 10.0).unwrap();
        let (r, t, p) = (2.5, 0.9, 1.3);
        let k = link.gaussian_curvature_at(t, p);
        let s = m.scalar_curvature(r, &[t, p]).unwrap();
        assert!((s - 2.0 * (k - 1.0) / (r * r)).abs() < 1e-8);
    }

    #[test]
    fn stencil_margin() {
        let m = AsymptoticConeMetric::exact(LinkMetric::unit_sphere(2), 1.0, 10.0).unwrap();
        assert!(m.ricci_tensor(1.001, &[1.0, 1.0]).is_err());
        assert!(m.ricci_tensor(2.0, &[0.001, 1.0]).is_err());
    }

    #[test]
    fn radial_identity_only_decided_on_cones() {
        let link = LinkMetric::scaled_sphere(2, 0.8).unwrap();
        let m = AsymptoticConeMetric::exact(link.clone(), 0.5, 10.0).unwrap();
        let samples = vec![(3.0, vec![0.8, 2.0], vec![0.4, 0.1, -0.3])];
        let rep = m.radial_identity_check(&samples);
        assert!(rep.deviation <= 1e-14);
        assert_eq!(rep.passes, Some(true));
        let p = Perturbation::radial(RadialProfile::Power {
            tau: 1.0,
            amplitude: 0.1,
        })
        .unwrap();
        let pm = AsymptoticConeMetric::new(link, 0.5, 10.0, Some(p.clone()), Some(p)).unwrap();
        let rep = pm.radial_identity_check(&samples);
        assert!(rep.deviation > 1e-4);
        assert_eq!(rep.passes, None);
    }
}
