//! Invariant suite behind `coniso verify`.
//!
//! Checks run on the configured metric, on the exact cone over its link and
//! on a few fixed reference links. Every check is deterministic: random
//! samples come from a seeded generator.

use std::f64::consts::PI;
use std::fmt::Write as _;

use coniso_core::cmc::{
    enclosed_volume, foliate_with, linearization_apply, mean_curvature, solve_cmc_with, Foliation,
    RadialGraph, SolverOptions, Target,
};
use coniso_core::cone::{cone_ricci, AsymptoticConeMetric, Direction};
use coniso_core::iso::{
    cone_angle, cy_functional, huisken_functional, iso_ratio, levy_gromov_check, ProfileVerdict,
    Region,
};
use coniso_core::link::{round_cap_profile, LinkMetric};
use coniso_core::spectral::SpectralField;
use coniso_core::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::{sample_coords, sample_radii, Context};
use crate::output::{fmt, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub status: Status,
    pub note: String,
}

enum Verdict {
    Measured {
        value: f64,
        tolerance: f64,
        ok: bool,
        note: String,
    },
    Skipped(String),
}

type Outcome = Result<Verdict>;

fn measured(value: f64, tolerance: f64, ok: bool, note: impl Into<String>) -> Outcome {
    Ok(Verdict::Measured {
        value,
        tolerance,
        ok,
        note: note.into(),
    })
}

fn within(value: f64, tol: f64) -> Outcome {
    measured(value, tol, value.is_finite() && value <= tol, "")
}

fn skip(why: &str) -> Outcome {
    Ok(Verdict::Skipped(why.to_string()))
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn add(&mut self, module: &'static str, name: &'static str, body: impl FnOnce() -> Outcome) {
        let (value, tolerance, status, note) = match body() {
            Ok(Verdict::Measured {
                value,
                tolerance,
                ok,
                note,
            }) => (value, tolerance, if ok { Status::Pass } else { Status::Fail }, note),
            Ok(Verdict::Skipped(why)) => (f64::NAN, f64::NAN, Status::Skip, why),
            Err(e) => (f64::NAN, f64::NAN, Status::Fail, e.to_string()),
        };
        self.checks.push(Check {
            module,
            name,
            value,
            tolerance,
            status,
            note,
        });
    }
}

fn reference_conformal() -> LinkMetric {
    let phi = SpectralField::from_triples(8, &[(0, 0, -0.2), (2, 0, 0.03), (1, 1, -0.02)])
        .expect("valid coefficients");
    LinkMetric::conformal_s2(phi).expect("valid link")
}

fn random_field(rng: &mut ChaCha8Rng, degree: usize, max_l: usize, sup: f64) -> SpectralField {
    let mut triples = Vec::new();
    for l in 1..=max_l {
        for m in -(l as i64)..=(l as i64) {
            triples.push((l, m, rng.random_range(-1.0..1.0)));
        }
    }
    let f = SpectralField::from_triples(degree, &triples).expect("degree covers max_l");
    f.scale(sup / f.sup_abs())
}

/// Runs the suite; an `Err` means the suite itself could not start.
pub fn run_suite(ctx: &Context) -> std::result::Result<Vec<Check>, CliError> {
    let metric = &ctx.metric;
    let link = metric.link();
    let cone = metric.cone();
    let n = link.dim();
    let mut s = Suite { checks: Vec::new() };
    let radii = sample_radii(metric, 5);

    // ---- link geometry ----
    s.add("link_geometry", "spectrum starts at zero", || {
        within(link.laplace_spectrum(ctx.settings.count)?[0].abs(), 1e-10)
    });
    s.add("link_geometry", "spectrum scales as rho^-2", || {
        let unit = LinkMetric::unit_sphere(n).laplace_spectrum(12)?;
        let mut worst: f64 = 0.0;
        for rho in [0.8, 1.3] {
            let scaled = LinkMetric::scaled_sphere(n, rho)?.laplace_spectrum(12)?;
            for (a, b) in scaled.iter().zip(&unit) {
                worst = worst.max((a * rho * rho - b).abs() / b.abs().max(1.0));
            }
        }
        within(worst, 1e-12)
    });
    s.add("link_geometry", "Bishop: area < 4 pi on curved conformal links", || {
        let Some(k) = link.gaussian_curvature_field() else {
            return skip("round link");
        };
        let kmax = k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if link.ricci_lower_bound().warning || kmax <= 1.0 {
            return skip("K >= 1 fails or K is identically 1");
        }
        let excess = link.area() - 4.0 * PI;
        measured(excess, 0.0, excess < 0.0, "")
    });
    s.add("link_geometry", "cap profile symmetry and rho^-1 scaling", || {
        let unit = LinkMetric::unit_sphere(n);
        let scaled = LinkMetric::scaled_sphere(n, 0.8)?;
        let mut worst: f64 = 0.0;
        for k in 1..20 {
            let b = k as f64 / 20.0;
            let i = unit.iso_profile(b)?.value;
            worst = worst.max((i - unit.iso_profile(1.0 - b)?.value).abs());
            worst = worst.max((scaled.iso_profile(b)?.value - i / 0.8).abs());
            worst = worst.max((i - round_cap_profile(n, b)).abs());
        }
        within(worst, 1e-12)
    });
    s.add("link_geometry", "Gauss-Bonnet on the conformal link", || {
        let l = if link.conformal_factor().is_some() {
            link.clone()
        } else {
            reference_conformal()
        };
        let phi = l.conformal_factor().expect("conformal");
        let k = l.gaussian_curvature_field().expect("conformal");
        let vals: Vec<f64> = k
            .iter()
            .zip(phi.values())
            .map(|(k, p)| k * (2.0 * p).exp())
            .collect();
        within((phi.grid().integrate(&vals) - 4.0 * PI).abs(), 1e-8)
    });

    // ---- cone metrics ----
    let ricci_samples = || -> Vec<(f64, Vec<f64>, Direction)> {
        let mut out = Vec::new();
        for r in sample_radii(&cone, 3) {
            for c in sample_coords(n) {
                out.push((r, c.clone(), Direction::Radial));
                out.push((r, c.clone(), Direction::RadialTangentMixed));
                for k in 0..n {
                    let mut v = vec![0.0; n];
                    v[k] = 1.0;
                    out.push((
                        r,
                        c.clone(),
                        Direction::Tangent {
                            coords: c.clone(),
                            vector: v,
                        },
                    ));
                }
            }
        }
        out
    };
    s.add("cone_metrics", "cone_ricci agrees with numeric Ricci", || {
        let mut worst: f64 = 0.0;
        for (r, c, d) in ricci_samples() {
            let (at, x, y) = d.chart_pair(link, r, &c);
            let numeric = cone.numeric_ricci(r, &at, &x, &y)?;
            worst = worst.max((numeric - cone_ricci(link, r, &d)?).abs());
        }
        within(worst, 1e-6)
    });
    s.add("cone_metrics", "cone Ricci nonnegative when Ric_L >= m - 2", || {
        if link.ricci_lower_bound().warning {
            return skip("Ric_L >= m - 2 fails");
        }
        let mut lowest = f64::INFINITY;
        for (r, _, d) in ricci_samples() {
            lowest = lowest.min(cone_ricci(link, r, &d)?);
        }
        within(-lowest, 1e-10)
    });
    s.add("cone_metrics", "slice homothety covariance", || {
        let lambda = 1.7;
        let mut worst: f64 = 0.0;
        for r in sample_radii(&cone, 4) {
            if lambda * r > cone.r_max() {
                continue;
            }
            let (a, b) = (cone.slice_data(r)?, cone.slice_data(lambda * r)?);
            for (ha, hb) in a.mean_curvature.iter().zip(&b.mean_curvature) {
                worst = worst.max((lambda * hb - ha).abs() / ha.abs());
            }
            worst = worst.max((b.area - lambda.powi(n as i32) * a.area).abs() / b.area);
        }
        within(worst, 1e-12)
    });
    s.add("cone_metrics", "ball volume increasing with coarea derivative", || {
        let mut worst: f64 = 0.0;
        let mut prev = 0.0;
        for &r in &radii {
            let v = metric.ball_volume(r)?;
            if v <= prev {
                return measured(v - prev, 0.0, false, "volume not increasing");
            }
            prev = v;
            // Fourth-order central difference.
            let h = 1e-3 * r;
            let d = |h: f64| -> Result<f64> {
                Ok((metric.ball_volume(r + h)? - metric.ball_volume(r - h)?) / (2.0 * h))
            };
            let deriv = (4.0 * d(h / 2.0)? - d(h)?) / 3.0;
            let slice = metric.slice_data(r)?;
            let radial: Vec<f64> = slice
                .grid
                .coords
                .iter()
                .map(|c| metric.components(r, c).0[0].sqrt())
                .collect();
            let coarea = slice.integrate(&radial);
            worst = worst.max((deriv - coarea).abs() / coarea);
        }
        within(worst, 1e-8)
    });
    s.add("cone_metrics", "decay norms decrease toward infinity", || {
        let (lo, hi) = (radii[0], radii[radii.len() - 1]);
        let mut worst: f64 = 0.0;
        for k in 0..=2 {
            let (a, b) = (metric.decay_norm(k, lo)?, metric.decay_norm(k, hi)?);
            if a > 0.0 {
                worst = worst.max(b / a);
            } else if b > 0.0 {
                worst = f64::INFINITY;
            }
        }
        measured(worst, 1.0, worst < 1.0, "")
    });
    s.add("cone_metrics", "nabla_Y (r d_r) = Y", || {
        let samples: Vec<(f64, Vec<f64>, Vec<f64>)> = ricci_samples()
            .into_iter()
            .filter_map(|(r, c, d)| match d {
                Direction::Tangent { .. } => Some((r, c.clone(), d.chart_pair(link, r, &c).1)),
                _ => None,
            })
            .collect();
        within(cone.radial_identity_check(&samples).deviation, 1e-10)
    });
    s.add("cone_metrics", "scalar curvature 2(K - 1)/r^2 on the cone", || {
        if n != 2 {
            return skip("closed form stated for m = 3");
        }
        let mut worst: f64 = 0.0;
        for r in sample_radii(&cone, 3) {
            for c in sample_coords(n) {
                let k = link.ricci_factor_at(&c);
                worst = worst.max((cone.scalar_curvature(r, &c)? - 2.0 * (k - 1.0) / (r * r)).abs());
            }
        }
        within(worst, 1e-6)
    });

    // ---- CMC leaves ----
    let gap = if n == 2 {
        link.lichnerowicz_check().map(|r| r.passes).unwrap_or(false)
    } else {
        false
    };
    let cmc_skip = if n != 2 {
        Some("graph solver needs m = 3")
    } else if !gap {
        Some("lambda_1 <= m - 1 on the link")
    } else {
        None
    };
    let opts = ctx.solver_options();
    let degree = ctx.settings.degree;
    let r_a = radii[1];
    let solve_volume = |m: &AsymptoticConeMetric, v: f64, start: &RadialGraph| {
        solve_cmc_with(m, Target::Volume(v), start, &opts)
    };
    s.add("cmc_solver", "volume target is met", || {
        if let Some(why) = cmc_skip {
            return skip(why);
        }
        let v = metric.ball_volume(r_a)?;
        let (g, _) = solve_volume(metric, v, &RadialGraph::slice(r_a, degree)?)?;
        within((enclosed_volume(metric, &g)? - v).abs() / v, 1e-9)
    });
    s.add("cmc_solver", "homothety equivariance on the exact cone", || {
        if let Some(why) = cmc_skip {
            return skip(why);
        }
        let lambda: f64 = 1.5;
        let v = cone.ball_volume(r_a)?;
        let (g1, _) = solve_volume(&cone, v, &RadialGraph::slice(r_a, degree)?)?;
        let (g2, _) = solve_volume(
            &cone,
            lambda.powi(3) * v,
            &RadialGraph::slice(lambda * r_a, degree)?,
        )?;
        let d = g1
            .u()
            .coefficients()
            .iter()
            .zip(g2.u().coefficients())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let base = (g2.base_radius() - lambda * g1.base_radius()).abs() / g2.base_radius();
        within(d.max(base), 1e-10)
    });
    s.add("cmc_solver", "local uniqueness from random starts", || {
        if let Some(why) = cmc_skip {
            return skip(why);
        }
        let v = metric.ball_volume(r_a)?;
        let (reference, _) = solve_volume(metric, v, &RadialGraph::slice(r_a, degree)?)?;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        let mut worst: f64 = 0.0;
        for _ in 0..8 {
            let sup = rng.random_range(0.02..0.1);
            let u0 = random_field(&mut rng, degree, 4, sup);
            let (g, _) = solve_volume(metric, v, &RadialGraph::new(r_a, u0)?)?;
            let g = g.rebased(reference.base_radius())?;
            worst = worst.max(g.u().distance(reference.u()));
        }
        within(worst, 1e-9)
    });
    s.add("cmc_solver", "linearization matches finite differences", || {
        if n != 2 {
            return skip("graph operators need m = 3");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let rho = rng.random_range(radii[0]..radii[3]);
            let g = RadialGraph::new(rho, random_field(&mut rng, 8, 4, 0.05))?;
            let v = random_field(&mut rng, 8, 6, 1.0);
            let lin = linearization_apply(metric, &g, &v)?;
            let eps = 1e-5;
            let plus = RadialGraph::new(rho, g.u().add(&v.scale(eps))?)?;
            let minus = RadialGraph::new(rho, g.u().add(&v.scale(-eps))?)?;
            let fd = mean_curvature(metric, &plus)?
                .add(&mean_curvature(metric, &minus)?.scale(-1.0))?
                .scale(0.5 / eps);
            let err = lin.add(&fd.scale(-1.0))?.sup_abs() / lin.sup_abs();
            worst = worst.max(err);
        }
        within(worst, 1e-6)
    });
    s.add("cmc_solver", "larger H lies inside", || {
        if let Some(why) = cmc_skip {
            return skip(why);
        }
        let (r1, r2) = (r_a, 1.3 * r_a);
        let solve_h = |r: f64| {
            solve_cmc_with(
                metric,
                Target::MeanCurvature(2.0 / r),
                &RadialGraph::slice(r, degree).expect("positive radius"),
                &opts,
            )
        };
        let (g1, _) = solve_h(r1)?;
        let (g2, _) = solve_h(r2)?;
        let gap = g1
            .radii()
            .iter()
            .zip(g2.radii())
            .fold(f64::INFINITY, |m, (a, b)| m.min(b - a));
        measured(gap, 0.0, gap > 0.0, "")
    });

    let foliation: Option<std::result::Result<Foliation, Error>> = match cmc_skip {
        Some(_) => None,
        None => Some(ctx.leaf_volumes().map_err(|e| Error::InvalidInput(e.to_string())).and_then(
            |vols| {
                let f = foliate_with(metric, &vols, &SolverOptions { jacobi_count: 4, ..opts })?;
                match f.failure {
                    Some(fail) => Err(fail.error),
                    None => Ok(f),
                }
            },
        )),
    };
    let with_foliation = |f: &dyn Fn(&Foliation) -> Outcome| -> Outcome {
        match &foliation {
            None => skip(cmc_skip.unwrap_or("no foliation")),
            Some(Err(e)) => Err(e.clone()),
            Some(Ok(fol)) => f(fol),
        }
    };
    s.add("cmc_solver", "foliation leaves are volume-preserving stable", || {
        with_foliation(&|fol| {
            let lowest = fol
                .leaves
                .iter()
                .map(|l| l.diagnostics.jacobi_eigenvalues[0])
                .fold(f64::INFINITY, f64::min);
            measured(lowest, -1e-8, fol.report.all_vp_stable, "")
        })
    });
    s.add("cmc_solver", "foliation nested with decreasing H", || {
        with_foliation(&|fol| {
            let ok = fol.report.nested && fol.report.h_decreasing;
            measured(fol.report.min_gap, 0.0, ok, "")
        })
    });

    // ---- isoperimetric functionals ----
    s.add("iso_analysis", "slab ratio independent of r on the cone", || {
        let vals: Vec<f64> = sample_radii(&cone, 5)
            .into_iter()
            .map(|r| iso_ratio(&cone, Region::Slab(r)))
            .collect::<Result<_>>()?;
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        within(hi - lo, 1e-10)
    });
    s.add("iso_analysis", "perturbed slab ratio approaches the cone angle", || {
        let angle = cone_angle(link)?.value;
        let rs = sample_radii(metric, 6);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &r in &rs {
            let d = (iso_ratio(metric, Region::Slab(r))? - angle).abs();
            if d > 1e-13 {
                xs.push(r.ln());
                ys.push(d.ln());
            }
        }
        if xs.len() < rs.len() {
            let worst = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max).exp();
            return measured(worst.max(0.0), 1e-13, xs.is_empty(), "no deviation");
        }
        let (slope, icpt) = fit_line(&xs, &ys);
        let need = metric.decay_rate().min(3.0) - 0.2;
        measured(-slope, need, -slope >= need, format!("C = {:.6e}", icpt.exp()))
    });
    s.add("iso_analysis", "cone angle at most 1, equality only for the unit sphere", || {
        let r = cone_angle(link)?;
        if !r.ricci_hypothesis {
            return skip("Ric_L >= m - 2 fails");
        }
        let ok = r.bound_holds && (r.rigidity == link.is_unit_round());
        measured(r.value, 1.0 + 1e-10, ok, "")
    });
    s.add("iso_analysis", "Huisken functional equals slab ratio on the cone", || {
        if n != 2 {
            return skip("defined for m = 3");
        }
        let mut worst: f64 = 0.0;
        for r in sample_radii(&cone, 5) {
            let q = iso_ratio(&cone, Region::Slab(r))?;
            worst = worst.max((huisken_functional(&cone, Region::Slab(r))? - q).abs());
        }
        within(worst, 1e-10)
    });
    s.add("iso_analysis", "CY integral of cone slabs is 4 area + 16 pi", || {
        if n != 2 {
            return skip("defined for m = 3");
        }
        let want = 4.0 * link.area() + 16.0 * PI;
        let mut worst: f64 = 0.0;
        for r in sample_radii(&cone, 3) {
            let cy = cy_functional(&cone, Region::Slab(r))?;
            if !cy.passes {
                return measured(cy.value, 64.0 * PI, false, "exceeds 64 pi");
            }
            worst = worst.max((cy.value - want).abs());
        }
        within(worst, 1e-6)
    });
    s.add("iso_analysis", "CY bound on foliation leaves", || {
        with_foliation(&|fol| {
            let mut worst = f64::NEG_INFINITY;
            for l in &fol.leaves {
                worst = worst.max(cy_functional(metric, Region::Leaf(&l.graph))?.value);
            }
            within(worst, 64.0 * PI + 1e-6)
        })
    });
    s.add("iso_analysis", "profile comparison never refuted", || {
        let rows = levy_gromov_check(link, &ctx.settings.betas)?;
        let refuted = rows
            .iter()
            .filter(|r| r.verdict == ProfileVerdict::Refuted)
            .count();
        within(refuted as f64, 0.0)
    });

    Ok(s.checks)
}

/// Least-squares line through `(x, y)`: `(slope, intercept)`.
fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn to_table(checks: &[Check]) -> Table {
    let mut t = Table::new(&["module", "invariant", "value", "tolerance", "status", "note"]);
    for c in checks {
        t.push(vec![
            c.module.to_string(),
            c.name.to_string(),
            fmt(c.value),
            fmt(c.tolerance),
            c.status.as_str().to_string(),
            c.note.clone(),
        ]);
    }
    t
}

/// Human-readable table for the terminal.
pub fn render(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        let measured = if c.status == Status::Skip {
            format!("{:>11}  {:<13}", "-", "")
        } else {
            format!("{:>11.3e}  (tol {:.1e})", c.value, c.tolerance)
        };
        let _ = writeln!(
            out,
            "[{:<4}] {:<13} {:<width$}  {measured} {}",
            c.status.as_str().to_uppercase(),
            c.module,
            c.name,
            c.note
        );
    }
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    let skipped = checks.iter().filter(|c| c.status == Status::Skip).count();
    let _ = writeln!(
        out,
        "{} checks: {} passed, {failed} failed, {skipped} skipped",
        checks.len(),
        checks.len() - failed - skipped
    );
    out
}
