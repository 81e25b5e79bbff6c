//! Damped Newton iteration for `H(g, u) = H₀`, with an optional volume
//! constraint adjoined as a bordered system in the unknowns `(u, H₀)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::jacobi::jacobi_in;
use super::{require_surface_link, Frame, RadialGraph};
use crate::cone::AsymptoticConeMetric;
use crate::spectral::SpectralField;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    MeanCurvature(f64),
    Volume(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Sup-norm residual at which the iteration stops.
    pub tol: f64,
    pub max_iterations: usize,
    /// Step halvings allowed per iteration.
    pub max_backtracks: usize,
    /// Number of Jacobi eigenvalues reported per leaf.
    pub jacobi_count: usize,
    /// Leaves with sup |u| above this are flagged as untrusted.
    pub delta: f64,
    /// Refuse to solve when λ1(−Δ_L) ≤ m − 1.
    pub check_hypothesis: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 30,
            max_backtracks: 8,
            jacobi_count: 8,
            delta: 0.25,
            check_hypothesis: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafDiagnostics {
    pub base_radius: f64,
    pub enclosed_volume: f64,
    /// The constant H₀ the leaf was solved for.
    pub h_target: f64,
    /// Area-weighted mean of the pointwise mean curvature.
    pub h_mean: f64,
    /// sup − inf of the pointwise mean curvature on the grid.
    pub h_osc: f64,
    /// Jacobi eigenvalues on mean-zero functions, ascending.
    pub jacobi_eigenvalues: Vec<f64>,
    /// Lowest Jacobi eigenvalue without the mean-zero constraint.
    pub jacobi_lowest_unconstrained: f64,
    pub vp_stable: bool,
    pub sup_u: f64,
    /// sup of the round-metric norms of ∇u and ∇²u (coordinate version).
    pub sup_grad_u: f64,
    pub sup_hess_u: f64,
    pub newton_steps: usize,
    pub residual_history: Vec<f64>,
    /// sup |u| ≤ δ and volume ≥ V₀.
    pub trusted: bool,
}

pub(crate) struct Workspace {
    pub solve: Frame,
    pub fine: Frame,
}

impl Workspace {
    pub fn new(metric: &AsymptoticConeMetric, degree: usize) -> Self {
        Self {
            solve: Frame::solve_grid(metric, degree),
            fine: Frame::fine_grid(metric, degree),
        }
    }
}

struct Evaluation {
    coeffs: Vec<f64>,
    h0: f64,
    residual: Vec<f64>,
    volume_residual: Option<f64>,
    merit: f64,
}

fn e0_scale() -> f64 {
    (4.0 * PI).sqrt()
}

fn evaluate(
    ws: &Workspace,
    metric: &AsymptoticConeMetric,
    rho: f64,
    coeffs: Vec<f64>,
    h0: f64,
    volume: Option<f64>,
) -> Result<Evaluation> {
    let pts = ws.solve.geometry(metric, rho, &coeffs)?;
    let values: Vec<f64> = pts.iter().map(|p| p.mean).collect();
    let mut residual = ws.solve.analyze(&values);
    residual[0] -= h0 * e0_scale();
    let grid_res = ws.solve.basis.synthesize(&residual);
    let mut merit = grid_res.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let volume_residual = match volume {
        None => None,
        Some(v) => {
            let (vol, _) = ws.fine.volume(metric, rho, &coeffs, false)?;
            let rel = (vol - v) / v;
            merit = merit.max(rel.abs());
            Some(rel)
        }
    };
    Ok(Evaluation {
        coeffs,
        h0,
        residual,
        volume_residual,
        merit,
    })
}

fn newton_step(
    ws: &Workspace,
    metric: &AsymptoticConeMetric,
    rho: f64,
    state: &Evaluation,
    volume: Option<f64>,
) -> Result<(Vec<f64>, f64)> {
    let (_, rows) = ws.solve.linearized_mean_curvature(metric, rho, &state.coeffs)?;
    let pointwise = ws.solve.linearization_matrix(rho, &rows);
    let jac = &ws.solve.analysis * pointwise;
    let nb = jac.nrows();
    match volume {
        None => {
            let rhs = -DVector::from_column_slice(&state.residual);
            let sol = jac
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Consistency("singular Newton system".into()))?;
            Ok((sol.as_slice().to_vec(), 0.0))
        }
        Some(v) => {
            let (_, grad) = ws.fine.volume(metric, rho, &state.coeffs, true)?;
            let grad = grad.expect("gradient requested");
            let mut big = DMatrix::zeros(nb + 1, nb + 1);
            big.view_mut((0, 0), (nb, nb)).copy_from(&jac);
            big[(0, nb)] = -e0_scale();
            for (a, g) in grad.iter().enumerate() {
                big[(nb, a)] = g / v;
            }
            let mut rhs = DVector::zeros(nb + 1);
            for a in 0..nb {
                rhs[a] = -state.residual[a];
            }
            rhs[nb] = -state.volume_residual.unwrap_or(0.0);
            let sol = big
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Consistency("singular bordered Newton system".into()))?;
            Ok((sol.as_slice()[..nb].to_vec(), sol[nb]))
        }
    }
}

/// Converged coefficients, H₀, Newton steps and merit history.
pub(crate) struct Solution {
    pub graph: RadialGraph,
    pub h0: f64,
    pub steps: usize,
    pub history: Vec<f64>,
}

pub(crate) fn check_hypothesis(metric: &AsymptoticConeMetric) -> Result<()> {
    let report = metric.link().lichnerowicz_check()?;
    if !report.passes {
        return Err(Error::HypothesisViolation {
            lambda1: report.lambda1,
            threshold: report.threshold,
        });
    }
    Ok(())
}

pub(crate) fn solve_in(
    ws: &Workspace,
    metric: &AsymptoticConeMetric,
    target: Target,
    initial: &RadialGraph,
    opts: &SolverOptions,
) -> Result<Solution> {
    let n = metric.link().dim() as f64;
    let (graph, mut h0, volume) = match target {
        Target::MeanCurvature(h) => {
            let rho = initial.base_radius();
            let slice = n / rho;
            if !(h >= 0.5 * slice && h <= 2.0 * slice) {
                return Err(Error::OutOfRange {
                    what: "target mean curvature",
                    value: h,
                    lo: 0.5 * slice,
                    hi: 2.0 * slice,
                });
            }
            (initial.clone(), h, None)
        }
        Target::Volume(v) => {
            let rho = metric.radius_for_volume(v)?;
            let graph = initial.rebased(rho)?;
            let pts = ws.solve.geometry(metric, rho, graph.u().coefficients())?;
            let (num, den) = pts
                .iter()
                .zip(&ws.solve.link_grid.weights)
                .fold((0.0, 0.0), |(a, b), (p, w)| {
                    (a + w * p.area_density * p.mean, b + w * p.area_density)
                });
            (graph, num / den, Some(v))
        }
    };
    let rho = graph.base_radius();
    let degree = graph.degree();
    let mut state = evaluate(ws, metric, rho, graph.u().coefficients().to_vec(), h0, volume)?;
    let mut history = vec![state.merit];
    let mut steps = 0;
    while state.merit > opts.tol {
        if steps >= opts.max_iterations {
            return Err(Error::NonConvergence {
                iterations: steps,
                last: state.merit,
                history,
            });
        }
        let (dc, dh) = newton_step(ws, metric, rho, &state, volume)?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let coeffs: Vec<f64> = state
                .coeffs
                .iter()
                .zip(&dc)
                .map(|(c, d)| c + lambda * d)
                .collect();
            let trial_h = state.h0 + lambda * dh;
            if let Ok(trial) = evaluate(ws, metric, rho, coeffs, trial_h, volume) {
                if trial.merit < state.merit {
                    accepted = Some(trial);
                    break;
                }
            }
            lambda *= 0.5;
        }
        steps += 1;
        match accepted {
            Some(trial) => {
                state = trial;
                history.push(state.merit);
            }
            None => {
                return Err(Error::NonConvergence {
                    iterations: steps,
                    last: state.merit,
                    history,
                })
            }
        }
    }
    h0 = state.h0;
    let u = SpectralField::from_coefficients(degree, state.coeffs)?;
    Ok(Solution {
        graph: RadialGraph::new(rho, u)?,
        h0,
        steps,
        history,
    })
}

pub(crate) fn diagnose(
    ws: &Workspace,
    metric: &AsymptoticConeMetric,
    sol: &Solution,
    opts: &SolverOptions,
) -> Result<LeafDiagnostics> {
    let graph = &sol.graph;
    let rho = graph.base_radius();
    let coeffs = graph.u().coefficients();
    let pts = ws.solve.geometry(metric, rho, coeffs)?;
    let (mut lo, mut hi, mut num, mut den) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0.0);
    for (p, w) in pts.iter().zip(&ws.solve.link_grid.weights) {
        lo = lo.min(p.mean);
        hi = hi.max(p.mean);
        num += w * p.area_density * p.mean;
        den += w * p.area_density;
    }
    let (volume, _) = ws.fine.volume(metric, rho, coeffs, false)?;
    let jac = jacobi_in(metric, &ws.fine, graph, opts.jacobi_count)?;
    let jets = ws.solve.basis.synthesize_jets(coeffs);
    let (mut sup_grad, mut sup_hess) = (0.0_f64, 0.0_f64);
    for (j, c) in jets.iter().zip(&ws.solve.link_grid.coords) {
        let s = c[0].sin();
        sup_grad = sup_grad.max((j.d_theta.powi(2) + (j.d_phi / s).powi(2)).sqrt());
        let hess = [j.d_theta_theta, j.d_theta_phi / s, j.d_phi_phi / (s * s)];
        sup_hess = sup_hess.max(hess.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    }
    let v0 = metric.ball_volume((4.0 * metric.r_min()).min(metric.r_max()))?;
    let sup_u = graph.sup_u();
    Ok(LeafDiagnostics {
        base_radius: rho,
        enclosed_volume: volume,
        h_target: sol.h0,
        h_mean: num / den,
        h_osc: hi - lo,
        jacobi_eigenvalues: jac.mean_zero.clone(),
        jacobi_lowest_unconstrained: jac.unconstrained.first().copied().unwrap_or(f64::NAN),
        vp_stable: jac.vp_stable,
        sup_u,
        sup_grad_u: sup_grad,
        sup_hess_u: sup_hess,
        newton_steps: sol.steps,
        residual_history: sol.history.clone(),
        trusted: sup_u <= opts.delta && volume >= v0,
    })
}

/// Solves `H(g, u) = const` for the given target starting from `initial`.
pub fn solve_cmc(
    metric: &AsymptoticConeMetric,
    target: Target,
    initial: &RadialGraph,
) -> Result<(RadialGraph, LeafDiagnostics)> {
    solve_cmc_with(metric, target, initial, &SolverOptions::default())
}

pub fn solve_cmc_with(
    metric: &AsymptoticConeMetric,
    target: Target,
    initial: &RadialGraph,
    opts: &SolverOptions,
) -> Result<(RadialGraph, LeafDiagnostics)> {
    require_surface_link(metric)?;
    if opts.check_hypothesis {
        check_hypothesis(metric)?;
    }
    let ws = Workspace::new(metric, initial.degree());
    let sol = solve_in(&ws, metric, target, initial, opts)?;
    let diag = diagnose(&ws, metric, &sol, opts)?;
    Ok((sol.graph, diag))
}
