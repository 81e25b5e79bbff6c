//! Cone metrics `g_C = dr² + r² g_L` and their asymptotically conical
//! perturbations `g = (1 + α) dr² + r² (1 + β) g_L` on an annulus.
//!
//! In the chart `(r, x¹, …, xⁿ)` with hyperspherical link coordinates every
//! supported metric is diagonal:
//!
//! ```text
//! g = A dr² + B ĝ,   A = 1 + α(r, x),   B = r² (1 + β(r, x)) e^{2ψ(x)}
//! ```
//!
//! where ĝ is the unit round metric and `g_L = e^{2ψ} ĝ`. All curvature code
//! works from `A`, `B` and their first derivatives.

mod curvature;
mod slice;

use crate::dual::Scalar;
use crate::link::{LinkGrid, LinkMetric, LinkSample};
use crate::quadrature::RadialRule;
use crate::spectral::{SpectralField, SphericalGrid};
use crate::{Error, Result};

pub use curvature::{cone_ricci, Direction, RadialIdentityReport, RicciStencil};
pub use slice::SliceData;

/// Radial factor of a perturbation term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialProfile {
    /// `a r^{−τ}`
    Power { tau: f64, amplitude: f64 },
    /// `a r^{−τ} ln r`
    PowerLog { tau: f64, amplitude: f64 },
    /// `a exp(−1/(1 − s²))` for `s = (r − center)/width`, zero for |s| ≥ 1.
    Bump {
        center: f64,
        width: f64,
        amplitude: f64,
    },
}

impl RadialProfile {
    pub fn value<S: Scalar>(&self, r: S) -> S {
        match *self {
            Self::Power { tau, amplitude } => r.powf(-tau) * amplitude,
            Self::PowerLog { tau, amplitude } => r.powf(-tau) * r.ln() * amplitude,
            Self::Bump {
                center,
                width,
                amplitude,
            } => {
                let s = (r - center) / width;
                if s.re().abs() >= 1.0 {
                    return S::cst(0.0);
                }
                let q = S::cst(1.0) - s * s;
                (S::cst(-1.0) / q).exp() * amplitude
            }
        }
    }

    pub fn derivative<S: Scalar>(&self, r: S) -> S {
        match *self {
            Self::Power { tau, amplitude } => r.powf(-tau - 1.0) * (-tau * amplitude),
            Self::PowerLog { tau, amplitude } => {
                r.powf(-tau - 1.0) * (S::cst(1.0) - r.ln() * tau) * amplitude
            }
            Self::Bump {
                center,
                width,
                amplitude,
            } => {
                let s = (r - center) / width;
                if s.re().abs() >= 1.0 {
                    return S::cst(0.0);
                }
                let q = S::cst(1.0) - s * s;
                (S::cst(-1.0) / q).exp() * s * (-2.0 * amplitude / width) / (q * q)
            }
        }
    }

    /// Decay exponent; compactly supported bumps decay faster than any power.
    pub fn decay_rate(&self) -> f64 {
        match *self {
            Self::Power { tau, .. } | Self::PowerLog { tau, .. } => tau,
            Self::Bump { .. } => f64::INFINITY,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |x: f64| x.is_finite();
        match *self {
            Self::Power { tau, amplitude } | Self::PowerLog { tau, amplitude } => {
                if !(tau > 0.0 && finite(tau) && finite(amplitude)) {
                    return Err(Error::invalid(format!(
                        "decay rate must be positive and finite, got tau = {tau}"
                    )));
                }
            }
            Self::Bump {
                center,
                width,
                amplitude,
            } => {
                if !(width > 0.0 && finite(width) && finite(center) && finite(amplitude)) {
                    return Err(Error::invalid("bump needs finite center and positive width"));
                }
            }
        }
        Ok(())
    }
}

/// One perturbation term: radial profile times a field on the link
/// (`None` means the constant field 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub profile: RadialProfile,
    pub field: Option<SpectralField>,
}

impl Perturbation {
    pub fn new(profile: RadialProfile, field: Option<SpectralField>) -> Result<Self> {
        profile.validate()?;
        Ok(Self { profile, field })
    }

    pub fn radial(profile: RadialProfile) -> Result<Self> {
        Self::new(profile, None)
    }
}

/// Value and link gradient of a perturbation field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldValue {
    pub value: f64,
    pub grad: Vec<f64>,
}

/// Everything the metric needs at one link point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointData {
    pub link: LinkSample,
    pub alpha: FieldValue,
    pub beta: FieldValue,
}

/// `A`, `B` and their first derivatives at a point `(r, x)`.
#[derive(Debug, Clone)]
pub struct MetricJet<S> {
    pub a: S,
    pub a_r: S,
    pub a_x: Vec<S>,
    pub b: S,
    pub b_r: S,
    pub b_x: Vec<S>,
}

impl<S: Scalar> MetricJet<S> {
    /// Diagonal of g and `dg[c][a] = ∂_c g_aa` in the chart `(r, x)`.
    pub fn components(&self, link: &LinkSample) -> (Vec<S>, Vec<Vec<S>>) {
        let n = link.ghat.len();
        let mut g = Vec::with_capacity(n + 1);
        g.push(self.a);
        for k in 0..n {
            g.push(self.b * link.ghat[k]);
        }
        let mut dg = Vec::with_capacity(n + 1);
        let mut row = Vec::with_capacity(n + 1);
        row.push(self.a_r);
        for k in 0..n {
            row.push(self.b_r * link.ghat[k]);
        }
        dg.push(row);
        for c in 0..n {
            let mut row = Vec::with_capacity(n + 1);
            row.push(self.a_x[c]);
            for k in 0..n {
                row.push(self.b_x[c] * link.ghat[k] + self.b * link.dghat[c][k]);
            }
            dg.push(row);
        }
        (g, dg)
    }
}

/// Christoffel symbols `Γ[a][b][c] = Γ^a_{bc}` of a diagonal metric with
/// `dg[c][a] = ∂_c g_aa`.
pub fn christoffel<S: Scalar>(g: &[S], dg: &[Vec<S>]) -> Vec<Vec<Vec<S>>> {
    let m = g.len();
    let zero = S::cst(0.0);
    let mut out = vec![vec![vec![zero; m]; m]; m];
    for a in 0..m {
        let inv = S::cst(0.5) / g[a];
        for b in 0..m {
            for c in 0..m {
                let mut v = zero;
                if a == c {
                    v = v + dg[b][a];
                }
                if a == b {
                    v = v + dg[c][a];
                }
                if b == c {
                    v = v - dg[a][b];
                }
                out[a][b][c] = v * inv;
            }
        }
    }
    out
}

/// `g = (1 + α) dr² + r² (1 + β) g_L` on `(r_min, r_max) × L`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticConeMetric {
    link: LinkMetric,
    r_min: f64,
    r_max: f64,
    alpha: Option<Perturbation>,
    beta: Option<Perturbation>,
}

impl AsymptoticConeMetric {
    pub fn new(
        link: LinkMetric,
        r_min: f64,
        r_max: f64,
        alpha: Option<Perturbation>,
        beta: Option<Perturbation>,
    ) -> Result<Self> {
        if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
            return Err(Error::invalid(format!(
                "annulus needs 0 < r_min < r_max < inf, got ({r_min}, {r_max})"
            )));
        }
        for p in alpha.iter().chain(beta.iter()) {
            p.profile.validate()?;
            if p.field.is_some() && link.dim() != 2 {
                return Err(Error::Unsupported(format!(
                    "perturbation fields that vary over the link need a 2-dimensional link, \
                     link dimension is {}",
                    link.dim()
                )));
            }
        }
        let metric = Self {
            link,
            r_min,
            r_max,
            alpha,
            beta,
        };
        metric.check_positivity()?;
        Ok(metric)
    }

    pub fn exact(link: LinkMetric, r_min: f64, r_max: f64) -> Result<Self> {
        Self::new(link, r_min, r_max, None, None)
    }

    /// The unperturbed cone on the same annulus.
    pub fn cone(&self) -> Self {
        Self {
            link: self.link.clone(),
            r_min: self.r_min,
            r_max: self.r_max,
            alpha: None,
            beta: None,
        }
    }

    pub fn link(&self) -> &LinkMetric {
        &self.link
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn alpha(&self) -> Option<&Perturbation> {
        self.alpha.as_ref()
    }

    pub fn beta(&self) -> Option<&Perturbation> {
        self.beta.as_ref()
    }

    /// Dimension m of the ambient manifold.
    pub fn dim(&self) -> usize {
        self.link.ambient_dim()
    }

    pub fn is_exact_cone(&self) -> bool {
        self.alpha.is_none() && self.beta.is_none()
    }

    /// Slowest decay exponent among the perturbation terms (∞ for g_C).
    pub fn decay_rate(&self) -> f64 {
        self.alpha
            .iter()
            .chain(self.beta.iter())
            .map(|p| p.profile.decay_rate())
            .fold(f64::INFINITY, f64::min)
    }

    fn check_positivity(&self) -> Result<()> {
        let samples = 400;
        let ratio = (self.r_max / self.r_min).ln();
        for (name, p) in [("alpha", &self.alpha), ("beta", &self.beta)] {
            let Some(p) = p else { continue };
            let (fmin, fmax) = match &p.field {
                None => (1.0, 1.0),
                Some(f) => {
                    let vals = f.with_degree(f.degree().max(8)).values().to_vec();
                    vals.iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                            (lo.min(*v), hi.max(*v))
                        })
                }
            };
            let mut rs: Vec<f64> = (0..=samples)
                .map(|i| self.r_min * (ratio * i as f64 / samples as f64).exp())
                .collect();
            if let RadialProfile::Bump { center, .. } = p.profile {
                if center > self.r_min && center < self.r_max {
                    rs.push(center);
                }
            }
            for r in rs {
                let pv = p.profile.value(r);
                let low = (pv * fmin).min(pv * fmax);
                if 1.0 + low <= 0.5 {
                    return Err(Error::invalid(format!(
                        "metric positivity margin violated: 1 + {name} = {} at r = {r}",
                        1.0 + low
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_radius(&self, what: &'static str, r: f64) -> Result<()> {
        if !(r >= self.r_min && r <= self.r_max) {
            return Err(Error::OutOfRange {
                what,
                value: r,
                lo: self.r_min,
                hi: self.r_max,
            });
        }
        Ok(())
    }

    fn field_value(p: &Option<Perturbation>, n: usize, coords: &[f64]) -> FieldValue {
        match p.as_ref().and_then(|p| p.field.as_ref()) {
            None => FieldValue {
                value: 1.0,
                grad: vec![0.0; n],
            },
            Some(f) => {
                let j = f.eval_jet(coords[0], coords[1]);
                FieldValue {
                    value: j.value,
                    grad: vec![j.d_theta, j.d_phi],
                }
            }
        }
    }

    pub fn point(&self, coords: &[f64]) -> PointData {
        let n = self.link.dim();
        PointData {
            link: self.link.sample(coords),
            alpha: Self::field_value(&self.alpha, n, coords),
            beta: Self::field_value(&self.beta, n, coords),
        }
    }

    /// Point data at every node of a link grid.
    pub fn points_on(&self, grid: &LinkGrid) -> Vec<PointData> {
        let n = self.link.dim();
        let samples = self.link.sample_grid(grid);
        let jets = |p: &Option<Perturbation>| -> Option<Vec<FieldValue>> {
            let f = p.as_ref()?.field.as_ref()?;
            let sg = grid.spherical.as_ref()?;
            Some(
                f.jets_on(sg)
                    .into_iter()
                    .map(|j| FieldValue {
                        value: j.value,
                        grad: vec![j.d_theta, j.d_phi],
                    })
                    .collect(),
            )
        };
        let alpha = jets(&self.alpha);
        let beta = jets(&self.beta);
        samples
            .into_iter()
            .enumerate()
            .map(|(i, link)| {
                let coords = link.coords.clone();
                PointData {
                    alpha: alpha
                        .as_ref()
                        .map(|v| v[i].clone())
                        .unwrap_or_else(|| Self::field_value(&self.alpha, n, &coords)),
                    beta: beta
                        .as_ref()
                        .map(|v| v[i].clone())
                        .unwrap_or_else(|| Self::field_value(&self.beta, n, &coords)),
                    link,
                }
            })
            .collect()
    }

    /// `A`, `B` and first derivatives at radius `r` over the link point `p`.
    pub fn jet<S: Scalar>(&self, r: S, p: &PointData) -> MetricJet<S> {
        let n = p.link.coords.len();
        let (pa, pa_r) = match &self.alpha {
            None => (S::cst(0.0), S::cst(0.0)),
            Some(q) => (q.profile.value(r), q.profile.derivative(r)),
        };
        let (pb, pb_r) = match &self.beta {
            None => (S::cst(0.0), S::cst(0.0)),
            Some(q) => (q.profile.value(r), q.profile.derivative(r)),
        };
        let fa = p.alpha.value;
        let fb = p.beta.value;
        let e2psi = (2.0 * p.link.psi).exp();
        let one_beta = pb * fb + 1.0;
        let e = one_beta * e2psi;
        let r2 = r * r;
        let b = r2 * e;
        let b_r = r * e * 2.0 + r2 * pb_r * (fb * e2psi);
        let a_x = (0..n).map(|i| pa * p.alpha.grad[i]).collect();
        let b_x = (0..n)
            .map(|i| r2 * (pb * p.beta.grad[i] + one_beta * (2.0 * p.link.dpsi[i])) * e2psi)
            .collect();
        MetricJet {
            a: pa * fa + 1.0,
            a_r: pa_r * fa,
            a_x,
            b,
            b_r,
            b_x,
        }
    }

    /// Metric diagonal and its first derivatives at `(r, coords)`.
    pub fn components(&self, r: f64, coords: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let p = self.point(coords);
        self.jet(r, &p).components(&p.link)
    }

    /// Analytic Christoffel symbols `Γ^a_{bc}` at `(r, coords)`.
    pub fn christoffel_at(&self, r: f64, coords: &[f64]) -> Vec<Vec<Vec<f64>>> {
        let (g, dg) = self.components(r, coords);
        christoffel(&g, &dg)
    }

    /// Link grid used for integrals over slices and volumes: the doubled
    /// spherical grid for 2-dimensional links.
    pub fn quadrature_grid(&self) -> LinkGrid {
        if self.link.dim() == 2 {
            LinkGrid::from_spherical(SphericalGrid::doubled(self.link.degree()))
        } else {
            self.link.grid()
        }
    }

    /// Volume density `√A · B^{n/2}` against the unit round measure.
    pub(crate) fn volume_density<S: Scalar>(&self, r: S, p: &PointData) -> S {
        let jet = self.jet(r, p);
        let n = p.link.coords.len() as f64;
        jet.a.sqrt() * jet.b.powf(0.5 * n)
    }

    /// Volume of the exact-cone core `(0, r_min) × L`.
    pub fn core_volume(&self) -> f64 {
        let m = self.dim() as f64;
        self.link.area() * self.r_min.powf(m) / m
    }

    /// `L^m_g(B_r)`: the core at its exact-cone value plus the annulus part.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        self.ball_volume_with(r, RadialRule::default())
    }

    pub fn ball_volume_with(&self, r: f64, rule: RadialRule) -> Result<f64> {
        self.check_radius("radius", r)?;
        let m = self.dim() as f64;
        if self.is_exact_cone() {
            return Ok(self.link.area() * r.powf(m) / m);
        }
        let grid = self.quadrature_grid();
        let points = self.points_on(&grid);
        let shell: f64 = points
            .iter()
            .zip(&grid.weights)
            .map(|(p, w)| w * rule.integrate(self.r_min, r, |s| self.volume_density(s, p)))
            .sum();
        Ok(self.core_volume() + shell)
    }

    /// Radius whose ball has volume `v`.
    pub fn radius_for_volume(&self, v: f64) -> Result<f64> {
        let m = self.dim() as f64;
        let lo_v = self.core_volume();
        let hi_v = self.ball_volume(self.r_max)?;
        if !(v > lo_v && v <= hi_v) {
            return Err(Error::OutOfRange {
                what: "volume",
                value: v,
                lo: lo_v,
                hi: hi_v,
            });
        }
        let mut r = (m * v / self.link.area()).powf(1.0 / m);
        if self.is_exact_cone() {
            return Ok(r);
        }
        let (mut lo, mut hi) = (self.r_min, self.r_max);
        r = r.clamp(lo, hi);
        for _ in 0..100 {
            let f = self.ball_volume(r)? - v;
            if f > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let slope = self.slice_area_weighted(r, true);
            let next = r - f / slope;
            let next = if next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            if (next - r).abs() <= 1e-15 * r || hi - lo <= 1e-15 * r {
                return Ok(next);
            }
            r = next;
        }
        Ok(r)
    }

    /// `∫_L B^{n/2}` (slice area) or `∫_L √A B^{n/2}` (= d vol/dr) at radius r.
    fn slice_area_weighted(&self, r: f64, with_radial: bool) -> f64 {
        let grid = self.quadrature_grid();
        let n = self.link.dim() as f64;
        self.points_on(&grid)
            .iter()
            .zip(&grid.weights)
            .map(|(p, w)| {
                let jet = self.jet(r, p);
                let base = jet.b.powf(0.5 * n);
                w * if with_radial { jet.a.sqrt() * base } else { base }
            })
            .sum()
    }

    /// Area of the slice `{r} × L`.
    pub fn slice_area(&self, r: f64) -> Result<f64> {
        self.check_radius("radius", r)?;
        if self.is_exact_cone() {
            return Ok(self.link.area() * r.powi(self.link.dim() as i32));
        }
        Ok(self.slice_area_weighted(r, false))
    }
}
