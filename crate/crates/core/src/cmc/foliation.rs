//! Continuation over a volume grid producing nested CMC leaves.

use super::solve::{check_hypothesis, diagnose, solve_in, Workspace};
use super::{require_surface_link, LeafDiagnostics, RadialGraph, SolverOptions, Target};
use crate::cone::AsymptoticConeMetric;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    pub volume: f64,
    pub graph: RadialGraph,
    pub diagnostics: LeafDiagnostics,
}

#[derive(Debug, Clone)]
pub struct LeafFailure {
    pub volume: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoliationReport {
    /// min over the grid and consecutive leaves of `R_{i+1} − R_i`.
    pub min_gap: f64,
    pub nested: bool,
    pub h_decreasing: bool,
    pub sup_u_decreasing: bool,
    /// Least-squares slope of log sup|u| against log r (None if some sup|u| is 0).
    pub sup_u_slope: Option<f64>,
    pub all_vp_stable: bool,
    pub all_trusted: bool,
    pub max_newton_steps: usize,
}

#[derive(Debug, Clone)]
pub struct Foliation {
    /// Leaves in ascending volume order.
    pub leaves: Vec<Leaf>,
    pub report: FoliationReport,
    /// Set when a leaf failed; `leaves` then holds the ones before it.
    pub failure: Option<LeafFailure>,
}

pub fn foliate(metric: &AsymptoticConeMetric, volumes: &[f64]) -> Result<Foliation> {
    foliate_with(metric, volumes, &SolverOptions::default())
}

/// Solves one leaf per volume, ascending, each started from the previous
/// leaf with u rescaled by the ratio of base radii.
pub fn foliate_with(
    metric: &AsymptoticConeMetric,
    volumes: &[f64],
    opts: &SolverOptions,
) -> Result<Foliation> {
    require_surface_link(metric)?;
    if volumes.is_empty() {
        return Err(Error::invalid("foliation needs at least one volume"));
    }
    let mut sorted = volumes.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("volume grid has repeated entries"));
    }
    // Validate the whole grid before doing any work.
    for &v in &sorted {
        metric.radius_for_volume(v)?;
    }
    check_hypothesis(metric)?;
    let degree = metric.link().degree();
    let ws = Workspace::new(metric, degree);
    let leaf_opts = SolverOptions {
        check_hypothesis: false,
        ..*opts
    };
    let mut leaves: Vec<Leaf> = Vec::with_capacity(sorted.len());
    let mut failure = None;
    for &v in &sorted {
        let rho = metric.radius_for_volume(v)?;
        let initial = match leaves.last() {
            None => RadialGraph::slice(rho, degree)?,
            Some(prev) => {
                let s = prev.graph.base_radius() / rho;
                RadialGraph::new(rho, prev.graph.u().scale(s))?
            }
        };
        let result = solve_in(&ws, metric, Target::Volume(v), &initial, &leaf_opts)
            .and_then(|sol| Ok((diagnose(&ws, metric, &sol, &leaf_opts)?, sol.graph)));
        match result {
            Ok((diagnostics, graph)) => leaves.push(Leaf {
                volume: v,
                graph,
                diagnostics,
            }),
            Err(error) => {
                failure = Some(LeafFailure { volume: v, error });
                break;
            }
        }
    }
    let report = report(&leaves);
    Ok(Foliation {
        leaves,
        report,
        failure,
    })
}

fn report(leaves: &[Leaf]) -> FoliationReport {
    let mut min_gap = f64::INFINITY;
    for w in leaves.windows(2) {
        let inner = w[0].graph.radii();
        let outer = w[1].graph.radii();
        for (a, b) in inner.iter().zip(&outer) {
            min_gap = min_gap.min(b - a);
        }
    }
    let h: Vec<f64> = leaves.iter().map(|l| l.diagnostics.h_target).collect();
    let sup: Vec<f64> = leaves.iter().map(|l| l.diagnostics.sup_u).collect();
    let sup_u_decreasing = sup
        .windows(2)
        .all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0));
    let sup_u_slope = if leaves.len() >= 2 && sup.iter().all(|s| *s > 0.0) {
        let xs: Vec<f64> = leaves
            .iter()
            .map(|l| l.graph.base_radius().ln())
            .collect();
        let ys: Vec<f64> = sup.iter().map(|s| s.ln()).collect();
        Some(fit_slope(&xs, &ys))
    } else {
        None
    };
    FoliationReport {
        min_gap,
        nested: min_gap > 0.0,
        h_decreasing: h.windows(2).all(|w| w[1] < w[0]),
        sup_u_decreasing,
        sup_u_slope,
        all_vp_stable: leaves.iter().all(|l| l.diagnostics.vp_stable),
        all_trusted: leaves.iter().all(|l| l.diagnostics.trusted),
        max_newton_steps: leaves
            .iter()
            .map(|l| l.diagnostics.newton_steps)
            .max()
            .unwrap_or(0),
    }
}

/// Least-squares slope of y against x.
pub(crate) fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
