//! Isoperimetric functionals on slabs `B_r` and foliation leaves.
//!
//! The isoperimetric quotient of a region Ω ⊂ Mᵐ is
//!
//! ```text
//! P(∂Ω)^m / (m^{m−1} ω V(Ω)^{m−1}),   ω = |S^{m−1}|,
//! ```
//!
//! normalised so that Euclidean balls give 1. Ratios reported here are
//! evaluated on explicit regions and are therefore upper bounds for the
//! isoperimetric constant.

use std::f64::consts::PI;

use crate::cmc::{enclosed_volume, surface_integrals, RadialGraph, SurfaceIntegrals};
use crate::cone::AsymptoticConeMetric;
use crate::link::{round_cap_profile, ConformalProfiler, LinkKind, LinkMetric, ProfileMethod};
use crate::{sphere_area, Error, Result};

/// Relative tolerance for the `value ≤ 1` bound on the cone angle.
pub const CONE_ANGLE_TOL: f64 = 1e-10;
/// Slack added to the Christodoulou–Yau thresholds.
pub const CY_SLACK: f64 = 1e-6;
/// Margin by which an upper bound must undercut the sphere profile to refute.
pub const REFUTE_MARGIN: f64 = 1e-7;

#[derive(Debug, Clone, Copy)]
pub enum Region<'a> {
    /// The ball `B_r`, bounded by the slice `{r} × L`.
    Slab(f64),
    /// The region below a radial graph.
    Leaf(&'a RadialGraph),
}

fn perimeter_and_volume(metric: &AsymptoticConeMetric, region: Region<'_>) -> Result<(f64, f64)> {
    match region {
        Region::Slab(r) => Ok((metric.slice_area(r)?, metric.ball_volume(r)?)),
        Region::Leaf(g) => Ok((
            surface_integrals(metric, g)?.area,
            enclosed_volume(metric, g)?,
        )),
    }
}

/// Isoperimetric quotient of the region.
pub fn iso_ratio(metric: &AsymptoticConeMetric, region: Region<'_>) -> Result<f64> {
    let (p, v) = perimeter_and_volume(metric, region)?;
    let m = metric.dim() as i32;
    let mf = m as f64;
    Ok(p.powi(m) / (mf.powi(m - 1) * sphere_area(m as usize - 1) * v.powi(m - 1)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeAngleReport {
    /// `area(L) / ω`.
    pub value: f64,
    pub ricci_lower_bound: f64,
    /// Whether `Ric_L ≥ (m − 2) g_L` holds on the grid.
    pub ricci_hypothesis: bool,
    /// `value ≤ 1` within tolerance.
    pub bound_holds: bool,
    /// `value = 1` within tolerance: the cone is Euclidean space.
    pub rigidity: bool,
}

/// Cone angle `area(L)/ω` with its comparison against 1.
///
/// Errors with [`Error::Consistency`] if the value exceeds 1 under the Ricci
/// hypothesis, which Bishop–Gromov rules out.
pub fn cone_angle(link: &LinkMetric) -> Result<ConeAngleReport> {
    let value = link.area() / sphere_area(link.dim());
    let ricci = link.ricci_lower_bound();
    let bound_holds = value <= 1.0 + CONE_ANGLE_TOL;
    if !ricci.warning && !bound_holds {
        return Err(Error::Consistency(format!(
            "cone angle {value} exceeds 1 although Ric_L >= {} (min {})",
            ricci.threshold, ricci.value
        )));
    }
    Ok(ConeAngleReport {
        value,
        ricci_lower_bound: ricci.value,
        ricci_hypothesis: !ricci.warning,
        bound_holds,
        rigidity: (value - 1.0).abs() <= CONE_ANGLE_TOL,
    })
}

fn require_three(metric: &AsymptoticConeMetric, what: &str) -> Result<()> {
    if metric.dim() != 3 {
        return Err(Error::Unsupported(format!(
            "{what} is defined for 3-dimensional manifolds, got m = {}",
            metric.dim()
        )));
    }
    Ok(())
}

/// Boundary integrals of the region: area, ∫H², ∫|h|², ∫R.
pub fn boundary_integrals(
    metric: &AsymptoticConeMetric,
    region: Region<'_>,
) -> Result<SurfaceIntegrals> {
    match region {
        Region::Leaf(g) => surface_integrals(metric, g),
        Region::Slab(r) => {
            let slice = metric.slice_data(r)?;
            let h2: Vec<f64> = slice.mean_curvature.iter().map(|h| h * h).collect();
            let scal = slice
                .grid
                .coords
                .iter()
                .map(|c| {
                    if metric.is_exact_cone() {
                        let n = metric.link().dim() as f64;
                        Ok(n * (metric.link().ricci_factor_at(c) - (n - 1.0)) / (r * r))
                    } else {
                        metric.scalar_curvature(r, c)
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(SurfaceIntegrals {
                area: slice.area,
                h_squared: slice.integrate(&h2),
                second_form_squared: slice.integrate(&slice.h_norm_sq),
                scalar_curvature: slice.integrate(&scal),
            })
        }
    }
}

/// `(1/16π) ∫ H²` over the boundary (m = 3).
pub fn huisken_functional(metric: &AsymptoticConeMetric, region: Region<'_>) -> Result<f64> {
    require_three(metric, "the Huisken functional")?;
    Ok(boundary_integrals(metric, region)?.h_squared / (16.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyReport {
    /// `∫ H² + 2|h|² + 2R`.
    pub value: f64,
    /// `value ≤ 64π`.
    pub passes: bool,
    /// `value ≤ 48π`, the bound for genus-zero surfaces.
    pub passes_genus_zero: bool,
}

pub fn cy_functional(metric: &AsymptoticConeMetric, region: Region<'_>) -> Result<CyReport> {
    require_three(metric, "the Christodoulou-Yau integral")?;
    let s = boundary_integrals(metric, region)?;
    let value = s.h_squared + 2.0 * s.second_form_squared + 2.0 * s.scalar_curvature;
    Ok(CyReport {
        value,
        passes: value <= 64.0 * PI + CY_SLACK,
        passes_genus_zero: value <= 48.0 * PI + CY_SLACK,
    })
}

/// `∫ |h|²` over the boundary (m = 3).
pub fn h_sq_integral(metric: &AsymptoticConeMetric, region: Region<'_>) -> Result<f64> {
    require_three(metric, "the second fundamental form integral")?;
    Ok(boundary_integrals(metric, region)?.second_form_squared)
}

/// All functionals of one region. The m = 3 quantities are `None` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoReport {
    pub ratio: f64,
    pub cone_angle_exact: f64,
    pub huisken_value: Option<f64>,
    pub cy: Option<CyReport>,
    pub h_sq_integral: Option<f64>,
}

pub fn iso_report(metric: &AsymptoticConeMetric, region: Region<'_>) -> Result<IsoReport> {
    let ratio = iso_ratio(metric, region)?;
    let cone_angle_exact = cone_angle(metric.link())?.value;
    if metric.dim() != 3 {
        return Ok(IsoReport {
            ratio,
            cone_angle_exact,
            huisken_value: None,
            cy: None,
            h_sq_integral: None,
        });
    }
    let s = boundary_integrals(metric, region)?;
    let value = s.h_squared + 2.0 * s.second_form_squared + 2.0 * s.scalar_curvature;
    Ok(IsoReport {
        ratio,
        cone_angle_exact,
        huisken_value: Some(s.h_squared / (16.0 * PI)),
        cy: Some(CyReport {
            value,
            passes: value <= 64.0 * PI + CY_SLACK,
            passes_genus_zero: value <= 48.0 * PI + CY_SLACK,
        }),
        h_sq_integral: Some(s.second_form_squared),
    })
}

/// Outcome of comparing the link profile with the round profile at one β.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileVerdict {
    /// Exact profile strictly above the round one.
    Confirmed,
    /// Exact profile equal to the round one (the round sphere itself).
    Equality,
    /// Exact profile strictly below the round one.
    Violated,
    /// Upper bound not below the round profile: nothing can be concluded.
    Inconclusive,
    /// Upper bound strictly below the round profile.
    Refuted,
}

impl ProfileVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Confirmed => "confirmed",
            Self::Equality => "equality",
            Self::Violated => "violated",
            Self::Inconclusive => "inconclusive",
            Self::Refuted => "refuted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileComparison {
    pub beta: f64,
    pub link_estimate: f64,
    pub sphere_profile: f64,
    pub method: ProfileMethod,
    pub is_upper_bound: bool,
    pub verdict: ProfileVerdict,
}

/// Tabulates the link profile against the unit-sphere profile on `betas`.
///
/// Exact profiles give a definite verdict. An upper bound `U ≥ I_S` says
/// nothing about the true profile; only `U < I_S` would show the true
/// profile falls below the round one.
pub fn levy_gromov_check(link: &LinkMetric, betas: &[f64]) -> Result<Vec<ProfileComparison>> {
    if let Some(&b) = betas.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
        return Err(Error::OutOfRange {
            what: "beta",
            value: b,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let profiler = match link.kind() {
        LinkKind::ConformalSphere2D => Some(ConformalProfiler::new(link)?),
        LinkKind::ScaledRoundSphere => None,
    };
    betas
        .iter()
        .map(|&beta| {
            let est = match &profiler {
                Some(p) => p.estimate(beta)?,
                None => link.iso_profile(beta)?,
            };
            let sphere = round_cap_profile(link.dim(), beta);
            let scale = sphere.abs().max(1e-300);
            let verdict = if est.is_upper_bound {
                if est.value < sphere - REFUTE_MARGIN {
                    ProfileVerdict::Refuted
                } else {
                    ProfileVerdict::Inconclusive
                }
            } else if (est.value - sphere).abs() <= 1e-10 * scale {
                ProfileVerdict::Equality
            } else if est.value > sphere {
                ProfileVerdict::Confirmed
            } else {
                ProfileVerdict::Violated
            };
            Ok(ProfileComparison {
                beta,
                link_estimate: est.value,
                sphere_profile: sphere,
                method: est.method,
                is_upper_bound: est.is_upper_bound,
                verdict,
            })
        })
        .collect()
}
