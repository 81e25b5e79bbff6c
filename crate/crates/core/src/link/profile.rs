//! Isoperimetric profile of the link.
//!
//! Round spheres get the exact cap profile. On conformal spheres the profile
//! is estimated from above by evaluating `perimeter / area(L)` on explicit
//! competitors of the right area: round caps centred at grid nodes, and
//! sub/super-level sets of the first nonconstant eigenfunctions. Every
//! competitor is parametrized as a star-shaped region in polar coordinates
//! about a centre, `{(s, a) : s < t(a)}`, which keeps area and perimeter
//! spectrally accurate.

use std::f64::consts::PI;

use crate::quadrature::gauss_legendre;
use crate::spectral::SpectralField;
use crate::{sphere_area, Error, Result};

use super::{LinkKind, LinkMetric};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMethod {
    /// Exact value for a round sphere.
    CapExact,
    /// Best round cap about a grid node (upper bound).
    CapCandidate,
    /// Best eigenfunction level set (upper bound).
    LevelSetUpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileEstimate {
    pub beta: f64,
    pub value: f64,
    pub method: ProfileMethod,
    pub is_upper_bound: bool,
}

pub(super) fn iso_profile(link: &LinkMetric, beta: f64) -> Result<ProfileEstimate> {
    match link.kind() {
        LinkKind::ScaledRoundSphere => {
            check_beta(beta)?;
            let radius = link.radius().expect("round link has a radius");
            Ok(ProfileEstimate {
                beta,
                value: round_cap_profile(link.dim(), beta) / radius,
                method: ProfileMethod::CapExact,
                is_upper_bound: false,
            })
        }
        LinkKind::ConformalSphere2D => ConformalProfiler::new(link)?.estimate(beta),
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::OutOfRange {
            what: "beta",
            value: beta,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// Profile of the unit round sphere Sⁿ: perimeter of the cap with volume
/// fraction β divided by the total volume.
pub fn round_cap_profile(n: usize, beta: f64) -> f64 {
    if beta <= 0.0 || beta >= 1.0 {
        return 0.0;
    }
    // Complementary caps share their boundary; evaluate on the smaller side.
    let b = beta.min(1.0 - beta);
    match n {
        1 => 1.0 / PI,
        2 => (b * (1.0 - b)).sqrt(),
        _ => {
            let t = cap_angle(n, b);
            sphere_area(n - 1) * t.sin().powi(n as i32 - 1) / sphere_area(n)
        }
    }
}

/// Geodesic radius of the cap of Sⁿ with volume fraction `beta`.
fn cap_angle(n: usize, beta: f64) -> f64 {
    let (x, w) = gauss_legendre(48);
    let power = n as i32 - 1;
    let norm = sphere_area(n) / sphere_area(n - 1);
    let fraction = |t: f64| -> f64 {
        let half = 0.5 * t;
        x.iter()
            .zip(&w)
            .map(|(x, w)| w * (half * (1.0 + x)).sin().powi(power))
            .sum::<f64>()
            * half
            / norm
    };
    let (mut lo, mut hi) = (0.0, PI);
    let mut t = PI * beta;
    for _ in 0..200 {
        let f = fraction(t) - beta;
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let slope = t.sin().powi(power) / norm;
        let next = t - f / slope;
        t = if slope > 0.0 && next >= lo && next <= hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if f.abs() < 1e-16 || hi - lo < 1e-15 {
            break;
        }
    }
    t
}

/// Polar tabulation about a centre: per ray, a level function and the area
/// and length densities of g_L at composite Gauss–Legendre nodes in s.
struct PolarTable {
    edges: Vec<f64>,
    ref_nodes: Vec<f64>,
    ref_weights: Vec<f64>,
    rays: usize,
    /// `[ray][node]`
    level: Vec<Vec<f64>>,
    level_at_center: f64,
    area_density: Vec<Vec<f64>>,
    length_density: Vec<Vec<f64>>,
    /// `[ray][edge]`: ∫_0^{edge} area_density ds.
    cumulative: Vec<Vec<f64>>,
    /// The level function is the distance s itself (round caps).
    geodesic: bool,
}

const PANELS: usize = 16;
const PANEL_POINTS: usize = 8;
const RAYS: usize = 64;

fn unit_vector(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn to_angles(x: [f64; 3]) -> (f64, f64) {
    let theta = x[2].clamp(-1.0, 1.0).acos();
    let mut phi = x[1].atan2(x[0]);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    (theta, phi)
}

impl PolarTable {
    /// `level` receives `(s, point)` and returns the level function there.
    fn new(
        center: (f64, f64),
        conformal: &SpectralField,
        level: impl Fn(f64, (f64, f64)) -> f64,
    ) -> Self {
        let (theta, phi) = center;
        let p = unit_vector(theta, phi);
        let e1 = [theta.cos() * phi.cos(), theta.cos() * phi.sin(), -theta.sin()];
        let e2 = [-phi.sin(), phi.cos(), 0.0];
        let (ref_nodes, ref_weights) = gauss_legendre(PANEL_POINTS);
        let edges: Vec<f64> = (0..=PANELS).map(|k| PI * k as f64 / PANELS as f64).collect();
        let mut nodes = Vec::with_capacity(PANELS * PANEL_POINTS);
        for k in 0..PANELS {
            let (a, b) = (edges[k], edges[k + 1]);
            nodes.extend(ref_nodes.iter().map(|x| 0.5 * (a + b) + 0.5 * (b - a) * x));
        }
        let mut table = Self {
            edges,
            ref_nodes,
            ref_weights,
            rays: RAYS,
            level: Vec::with_capacity(RAYS),
            level_at_center: level(0.0, (theta, phi)),
            area_density: Vec::with_capacity(RAYS),
            length_density: Vec::with_capacity(RAYS),
            cumulative: Vec::with_capacity(RAYS),
            geodesic: false,
        };
        for j in 0..RAYS {
            let a = 2.0 * PI * j as f64 / RAYS as f64;
            let dir = [
                a.cos() * e1[0] + a.sin() * e2[0],
                a.cos() * e1[1] + a.sin() * e2[1],
                a.cos() * e1[2] + a.sin() * e2[2],
            ];
            let mut lv = Vec::with_capacity(nodes.len());
            let mut ad = Vec::with_capacity(nodes.len());
            let mut ld = Vec::with_capacity(nodes.len());
            for &s in &nodes {
                let x = [
                    s.cos() * p[0] + s.sin() * dir[0],
                    s.cos() * p[1] + s.sin() * dir[1],
                    s.cos() * p[2] + s.sin() * dir[2],
                ];
                let ang = to_angles(x);
                let f = conformal.eval(ang.0, ang.1);
                lv.push(level(s, ang));
                ad.push((2.0 * f).exp() * s.sin());
                ld.push(f.exp());
            }
            let mut cum = vec![0.0; PANELS + 1];
            for k in 0..PANELS {
                let half = 0.5 * (table.edges[k + 1] - table.edges[k]);
                let seg: f64 = (0..PANEL_POINTS)
                    .map(|i| table.ref_weights[i] * ad[k * PANEL_POINTS + i])
                    .sum::<f64>()
                    * half;
                cum[k + 1] = cum[k] + seg;
            }
            table.level.push(lv);
            table.area_density.push(ad);
            table.length_density.push(ld);
            table.cumulative.push(cum);
        }
        table
    }

    fn panel_of(&self, s: f64) -> usize {
        ((s / PI * PANELS as f64).floor() as usize).min(PANELS - 1)
    }

    /// Lagrange interpolation of tabulated `values` (one ray) at `s`.
    fn interpolate(&self, values: &[f64], s: f64) -> f64 {
        let k = self.panel_of(s);
        let (a, b) = (self.edges[k], self.edges[k + 1]);
        let x = (2.0 * s - a - b) / (b - a);
        let nodes = &self.ref_nodes;
        let mut total = 0.0;
        for i in 0..PANEL_POINTS {
            let mut basis = 1.0;
            for m in 0..PANEL_POINTS {
                if m != i {
                    basis *= (x - nodes[m]) / (nodes[i] - nodes[m]);
                }
            }
            total += basis * values[k * PANEL_POINTS + i];
        }
        total
    }

    /// First crossing of `level = c` along ray `j`, requiring the level
    /// function to increase monotonically up to it.
    fn crossing(&self, j: usize, c: f64) -> Option<f64> {
        let lv = &self.level[j];
        if self.level_at_center >= c {
            return None;
        }
        let mut prev_s = 0.0;
        let mut prev_v = self.level_at_center;
        for k in 0..PANELS {
            for i in 0..PANEL_POINTS {
                let idx = k * PANEL_POINTS + i;
                let s = 0.5 * (self.edges[k] + self.edges[k + 1])
                    + 0.5 * (self.edges[k + 1] - self.edges[k]) * self.ref_nodes[i];
                let v = lv[idx];
                if v < prev_v {
                    return None;
                }
                if v >= c {
                    let (mut lo, mut hi) = (prev_s, s);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if self.interpolate(lv, mid) < c {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    return Some(0.5 * (lo + hi));
                }
                prev_s = s;
                prev_v = v;
            }
        }
        // Last node to the antipode of the centre.
        let end = self.interpolate(lv, PI);
        if end < c || end < prev_v {
            return None;
        }
        let (mut lo, mut hi) = (prev_s, PI);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.interpolate(lv, mid) < c {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    fn area_to(&self, j: usize, t: f64) -> f64 {
        let k = self.panel_of(t);
        let a = self.edges[k];
        let half = 0.5 * (t - a);
        let partial: f64 = self
            .ref_nodes
            .iter()
            .zip(&self.ref_weights)
            .map(|(x, w)| w * self.interpolate(&self.area_density[j], a + half * (1.0 + x)))
            .sum::<f64>()
            * half;
        self.cumulative[j][k] + partial
    }

    /// Radii of the star-shaped region `{level < c}` along every ray.
    fn radii(&self, c: f64) -> Option<Vec<f64>> {
        if self.geodesic {
            return (c > 0.0 && c < PI).then(|| vec![c; self.rays]);
        }
        (0..self.rays).map(|j| self.crossing(j, c)).collect()
    }

    fn area(&self, radii: &[f64]) -> f64 {
        radii
            .iter()
            .enumerate()
            .map(|(j, &t)| self.area_to(j, t))
            .sum::<f64>()
            * 2.0
            * PI
            / self.rays as f64
    }

    fn perimeter(&self, radii: &[f64]) -> f64 {
        let n = self.rays;
        let slope = periodic_derivative(radii);
        (0..n)
            .map(|j| {
                let t = radii[j];
                let ef = self.interpolate(&self.length_density[j], t);
                ef * (t.sin().powi(2) + slope[j].powi(2)).sqrt()
            })
            .sum::<f64>()
            * 2.0
            * PI
            / n as f64
    }

    /// Perimeter of the sublevel region enclosing `target` area, if the
    /// family stays star-shaped up to that area.
    fn perimeter_at_area(&self, target: f64, lo: f64, hi: f64) -> Option<f64> {
        let (mut lo, mut hi) = (lo, hi);
        // Shrink hi until the region is star-shaped there.
        let mut hi_area = None;
        for _ in 0..60 {
            if let Some(r) = self.radii(hi) {
                hi_area = Some(self.area(&r));
                break;
            }
            hi = lo + 0.9 * (hi - lo);
        }
        if hi_area? < target {
            return None;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            match self.radii(mid) {
                Some(r) if self.area(&r) < target => lo = mid,
                Some(_) => hi = mid,
                None => return None,
            }
            if hi - lo < 1e-14 * (1.0 + hi.abs()) {
                break;
            }
        }
        let r = self.radii(0.5 * (lo + hi))?;
        Some(self.perimeter(&r))
    }
}

/// Spectral derivative of samples of a periodic function on [0, 2π).
fn periodic_derivative(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let half = n / 2;
    let mut out = vec![0.0; n];
    for k in 1..half {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, v) in samples.iter().enumerate() {
            let ang = 2.0 * PI * (k * j) as f64 / n as f64;
            re += v * ang.cos();
            im -= v * ang.sin();
        }
        re /= n as f64;
        im /= n as f64;
        // d/da of 2 Re(c_k e^{ika}) = 2 Re(i k c_k e^{ika})
        for (j, o) in out.iter_mut().enumerate() {
            let ang = 2.0 * PI * (k * j) as f64 / n as f64;
            *o += 2.0 * k as f64 * (-im * ang.cos() - re * ang.sin());
        }
    }
    out
}

/// Upper-bound estimator for conformal links; tables are built once and
/// reused across β.
pub struct ConformalProfiler {
    total_area: f64,
    caps: Vec<PolarTable>,
    level_sets: Vec<(PolarTable, f64)>,
}

impl ConformalProfiler {
    pub fn new(link: &LinkMetric) -> Result<Self> {
        let phi = link
            .conformal_factor()
            .ok_or_else(|| Error::invalid("conformal profiler needs a conformal link"))?;
        let total_area = link.area();
        let grid = phi.grid();
        // Every other latitude and every third longitude of the default grid.
        let mut caps = Vec::new();
        for &theta in grid.theta.iter().step_by(2) {
            for &p in grid.phi.iter().step_by(3) {
                let mut table = PolarTable::new((theta, p), phi, |s, _| s);
                table.geodesic = true;
                caps.push(table);
            }
        }
        let (_, eigenfunctions) = link.conformal_eigenpairs(4)?;
        let mut level_sets = Vec::new();
        for f in eigenfunctions.iter().skip(1) {
            for sign in [1.0, -1.0] {
                let values = f.values();
                let (imin, _) = values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (i, sign * v))
                    .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
                let center = grid.node(imin);
                let table = PolarTable::new(center, phi, |_, (t, p)| sign * f.eval(t, p));
                let top = table
                    .level
                    .iter()
                    .flatten()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
                level_sets.push((table, top));
            }
        }
        Ok(Self {
            total_area,
            caps,
            level_sets,
        })
    }

    pub fn estimate(&self, beta: f64) -> Result<ProfileEstimate> {
        check_beta(beta)?;
        if beta == 0.0 || beta == 1.0 {
            return Ok(ProfileEstimate {
                beta,
                value: 0.0,
                method: ProfileMethod::CapCandidate,
                is_upper_bound: false,
            });
        }
        let target = beta * self.total_area;
        let mut best = (f64::INFINITY, ProfileMethod::CapCandidate);
        for cap in &self.caps {
            if let Some(p) = cap.perimeter_at_area(target, 0.0, PI * (1.0 - 1e-9)) {
                if p < best.0 {
                    best = (p, ProfileMethod::CapCandidate);
                }
            }
        }
        for (table, top) in &self.level_sets {
            if let Some(p) = table.perimeter_at_area(target, table.level_at_center, *top) {
                if p < best.0 {
                    best = (p, ProfileMethod::LevelSetUpperBound);
                }
            }
        }
        if !best.0.is_finite() {
            return Err(Error::Consistency(format!(
                "no admissible competitor found for beta = {beta}"
            )));
        }
        Ok(ProfileEstimate {
            beta,
            value: best.0 / self.total_area,
            method: best.1,
            is_upper_bound: true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_s2_profile_closed_form() {
        let link = LinkMetric::unit_sphere(2);
        let half = link.iso_profile(0.5).unwrap();
        assert!((half.value - 0.5).abs() < 1e-15);
        assert_eq!(half.method, ProfileMethod::CapExact);
        assert!(!half.is_upper_bound);
        assert_eq!(link.iso_profile(0.0).unwrap().value, 0.0);
        assert_eq!(link.iso_profile(1.0).unwrap().value, 0.0);
        assert!(link.iso_profile(1.2).is_err());
    }

    #[test]
    fn scaling_law() {
        let half = LinkMetric::scaled_sphere(2, 0.5).unwrap().iso_profile(0.5).unwrap();
        assert!((half.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn higher_dimensional_caps_match_cap_geometry() {
        // S³: fraction of the cap of radius π/2 is 1/2 and its boundary is a unit S².
        let v = round_cap_profile(3, 0.5);
        assert!((v - 4.0 * PI / (2.0 * PI * PI)).abs() < 1e-13);
        // S³ cap of radius t has fraction (t - sin t cos t)/π.
        let t: f64 = 0.9;
        let beta = (t - t.sin() * t.cos()) / PI;
        let expected = 4.0 * PI * t.sin().powi(2) / (2.0 * PI * PI);
        assert!((round_cap_profile(3, beta) - expected).abs() < 1e-12);
        assert!((round_cap_profile(1, 0.3) - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn periodic_derivative_of_trig() {
        let n = 64;
        let s: Vec<f64> = (0..n)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / n as f64;
                0.3 * (2.0 * a).sin() + 0.1 * (5.0 * a).cos()
            })
            .collect();
        let d = periodic_derivative(&s);
        for (j, v) in d.iter().enumerate() {
            let a = 2.0 * PI * j as f64 / n as f64;
            let exact = 0.6 * (2.0 * a).cos() - 0.5 * (5.0 * a).sin();
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn conformal_estimator_recovers_round_profile() {
        let link = LinkMetric::conformal_s2(SpectralField::zero(8)).unwrap();
        let prof = ConformalProfiler::new(&link).unwrap();
        for beta in [0.1, 0.3, 0.5, 0.8] {
            let est = prof.estimate(beta).unwrap();
            let exact = (beta * (1.0 - beta)).sqrt();
            assert!(est.is_upper_bound);
            assert!((est.value - exact).abs() < 1e-8, "beta {beta}: {} vs {exact}", est.value);
        }
    }
}
