use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use coniso_core::cmc::{foliate_with, jacobi_spectrum, Foliation, SolverOptions};
use coniso_core::cone::{cone_ricci, AsymptoticConeMetric, Direction, RicciStencil};
use coniso_core::io::LeafRecord;
use coniso_core::iso::{cone_angle, iso_report, levy_gromov_check, ConeAngleReport, Region};
use serde_json::json;

use crate::config::{
    default_betas, parse_list, Resolved, RunConfig, DEFAULT_COUNT, DEFAULT_FD_STEP, DEFAULT_TOL,
};
use crate::output::{fmt, OutputDir, Table};
use crate::{verify, CliError, Command, Common};

/// Everything a command needs, after config and flags are merged.
pub struct Context {
    pub name: &'static str,
    pub config: RunConfig,
    pub metric: AsymptoticConeMetric,
    pub settings: Resolved,
    volumes: Option<Vec<f64>>,
    pub out: OutputDir,
    written: Vec<String>,
}

pub fn dispatch(command: &Command) -> Result<(), CliError> {
    let (name, common) = match command {
        Command::Spectrum(c) => ("spectrum", c),
        Command::Curvature(c) => ("curvature", c),
        Command::Foliate(c) => ("foliate", c),
        Command::Stability(c) => ("stability", c),
        Command::ConeAngle(c) => ("cone-angle", c),
        Command::Profile(c) => ("profile", c),
        Command::Verify(c) => ("verify", c),
    };
    let mut ctx = Context::prepare(name, common)?;
    let result = match command {
        Command::Spectrum(_) => spectrum(&mut ctx),
        Command::Curvature(_) => curvature(&mut ctx),
        Command::Foliate(_) => foliate(&mut ctx),
        Command::Stability(_) => stability(&mut ctx),
        Command::ConeAngle(_) => cone_angle_cmd(&mut ctx),
        Command::Profile(_) => profile(&mut ctx),
        Command::Verify(_) => verify_cmd(&mut ctx),
    };
    // The sidecar records the run even when verification fails.
    if result.is_ok() || matches!(result, Err(CliError::VerifyFailed(_))) {
        ctx.write_metadata()?;
    }
    result
}

impl Context {
    fn prepare(name: &'static str, common: &Common) -> Result<Self, CliError> {
        let config = RunConfig::load(&common.config)?;
        let metric = config
            .metric
            .build()
            .map_err(|e| CliError::Config(format!("metric: {e}")))?;
        let betas = match &common.betas {
            Some(text) => parse_list(text).map_err(|e| CliError::Config(format!("--betas {e}")))?,
            None => config.betas.clone().unwrap_or_else(default_betas),
        };
        let volumes = match &common.volumes {
            Some(text) => {
                Some(parse_list(text).map_err(|e| CliError::Config(format!("--volumes {e}")))?)
            }
            None => match (&config.volumes, &config.radii) {
                (Some(v), _) => Some(v.clone()),
                (None, Some(radii)) => Some(
                    radii
                        .iter()
                        .map(|&r| metric.ball_volume(r))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| CliError::Config(format!("radii: {e}")))?,
                ),
                (None, None) => None,
            },
        };
        let tol = common.tol.or(config.tol).unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0) {
            return Err(CliError::Config(format!("tolerance must be positive, got {tol}")));
        }
        let fd_step = config.fd_step.unwrap_or(DEFAULT_FD_STEP);
        if !(fd_step > 0.0 && fd_step < 0.1) {
            return Err(CliError::Config(format!("fd_step must lie in (0, 0.1), got {fd_step}")));
        }
        let count = common.count.or(config.count).unwrap_or(DEFAULT_COUNT);
        if count < 2 {
            return Err(CliError::Config("count must be at least 2".into()));
        }
        let out_dir = common
            .out
            .clone()
            .or_else(|| config.out.clone())
            .unwrap_or_else(|| PathBuf::from("coniso-out"));
        let out = OutputDir::create(&out_dir)?;
        let settings = Resolved {
            degree: metric.link().degree(),
            tol,
            fd_step,
            count,
            betas,
        };
        Ok(Self {
            name,
            config,
            metric,
            settings,
            volumes,
            out,
            written: Vec::new(),
        })
    }

    fn csv(&mut self, file: &str, table: &Table) -> Result<(), CliError> {
        self.out.write_csv(file, table)?;
        self.written.push(file.to_string());
        Ok(())
    }

    fn json<T: serde::Serialize>(&mut self, file: &str, value: &T) -> Result<(), CliError> {
        self.out.write_json(file, value)?;
        self.written.push(file.to_string());
        Ok(())
    }

    fn write_metadata(&self) -> Result<(), CliError> {
        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let doc = json!({
            "command": self.name,
            "version": env!("CARGO_PKG_VERSION"),
            "created_unix": created,
            "config": self.config,
            "settings": self.settings,
            "outputs": self.written,
        });
        self.out.write_json("metadata.json", &doc)?;
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.settings.tol,
            jacobi_count: self.settings.count,
            ..SolverOptions::default()
        }
    }

    pub fn stencil(&self) -> RicciStencil {
        RicciStencil {
            radial_rel: self.settings.fd_step,
            angular: self.settings.fd_step,
            ..RicciStencil::default()
        }
    }

    /// Leaf volumes from the flags or config, else a geometric radius grid.
    pub fn leaf_volumes(&self) -> Result<Vec<f64>, CliError> {
        match &self.volumes {
            Some(v) => Ok(v.clone()),
            None => sample_radii(&self.metric, 6)
                .into_iter()
                .map(|r| self.metric.ball_volume(r).map_err(CliError::from))
                .collect(),
        }
    }

    /// Radii for slab quantities: the config radii or a geometric grid.
    pub fn radii(&self) -> Vec<f64> {
        self.config
            .radii
            .clone()
            .unwrap_or_else(|| sample_radii(&self.metric, 5))
    }
}

/// `count` geometrically spaced radii inside the annulus, away from its ends.
pub fn sample_radii(metric: &AsymptoticConeMetric, count: usize) -> Vec<f64> {
    let (r0, r1) = (metric.r_min(), metric.r_max());
    let (lo, hi) = if 4.0 * r0 < 0.5 * r1 {
        (4.0 * r0, 0.5 * r1)
    } else {
        (r0 + 0.1 * (r1 - r0), r1 - 0.1 * (r1 - r0))
    };
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// A few fixed points of the link, away from the coordinate singularities.
pub fn sample_coords(dim: usize) -> Vec<Vec<f64>> {
    (0..3)
        .map(|j| {
            let mut c: Vec<f64> = (0..dim - 1)
                .map(|k| (0.6 + 0.55 * j as f64 + 0.2 * k as f64).min(2.9))
                .collect();
            c.push(0.4 + 2.1 * j as f64);
            c
        })
        .collect()
}

fn spectrum(ctx: &mut Context) -> Result<(), CliError> {
    let link = ctx.metric.link();
    let eigenvalues = link.laplace_spectrum(ctx.settings.count)?;
    let lich = link.lichnerowicz_check()?;
    let mut table = Table::new(&["index", "eigenvalue"]);
    for (i, v) in eigenvalues.iter().enumerate() {
        table.push(vec![i.to_string(), fmt(*v)]);
    }
    let verdict = if lich.passes {
        "lambda_1 > m - 1: the foliation hypothesis holds"
    } else if !lich.hypotheses_hold {
        "lambda_1 <= m - 1: borderline or failing link, no foliation"
    } else {
        "lambda_1 <= m - 1"
    };
    let doc = json!({
        "ricci_lower_bound": lich.ricci_bound,
        "lambda1": lich.lambda1,
        "threshold": lich.threshold,
        "passes": lich.passes,
        "hypotheses_hold": lich.hypotheses_hold,
        "verdict": verdict,
    });
    ctx.csv("spectrum.csv", &table)?;
    ctx.json("lichnerowicz.json", &doc)?;
    println!("lambda_1 = {:.12}, m - 1 = {}: {verdict}", lich.lambda1, lich.threshold);
    Ok(())
}

fn direction_name(d: &Direction) -> String {
    match d {
        Direction::Radial => "radial".into(),
        Direction::RadialTangentMixed => "mixed".into(),
        Direction::Tangent { vector, .. } => {
            let k = vector.iter().position(|v| *v != 0.0).unwrap_or(0);
            format!("tangent{}", k + 1)
        }
    }
}

fn curvature(ctx: &mut Context) -> Result<(), CliError> {
    let metric = &ctx.metric;
    let link = metric.link();
    let n = link.dim();
    let stencil = ctx.stencil();
    let mut header = vec!["r".to_string()];
    header.extend((1..=n).map(|k| format!("x{k}")));
    header.extend(["direction", "cone_ricci", "numeric_ricci", "difference"].map(String::from));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(&header);
    let mut worst: f64 = 0.0;
    for r in ctx.radii() {
        for coords in sample_coords(n) {
            let mut directions = vec![Direction::Radial, Direction::RadialTangentMixed];
            for k in 0..n {
                let mut v = vec![0.0; n];
                v[k] = 1.0;
                directions.push(Direction::Tangent {
                    coords: coords.clone(),
                    vector: v,
                });
            }
            for d in &directions {
                let exact = cone_ricci(link, r, d)?;
                let (at, x, y) = d.chart_pair(link, r, &coords);
                let ric = metric.ricci_tensor_with(r, &at, stencil)?;
                let mut numeric = 0.0;
                for a in 0..=n {
                    for b in 0..=n {
                        numeric += ric[a][b] * x[a] * y[b];
                    }
                }
                worst = worst.max((numeric - exact).abs());
                let mut row = vec![fmt(r)];
                row.extend(at.iter().map(|c| fmt(*c)));
                row.extend([direction_name(d), fmt(exact), fmt(numeric), fmt(numeric - exact)]);
                table.push(row);
            }
        }
    }
    let mut decay = Table::new(&["r", "order0", "order1", "order2"]);
    for r in ctx.radii() {
        decay.push(vec![
            fmt(r),
            fmt(metric.decay_norm(0, r)?),
            fmt(metric.decay_norm(1, r)?),
            fmt(metric.decay_norm(2, r)?),
        ]);
    }
    let exact = metric.is_exact_cone();
    ctx.csv("curvature.csv", &table)?;
    ctx.csv("decay.csv", &decay)?;
    println!(
        "{} Ricci samples, max |numeric - cone| = {worst:.3e}{}",
        table.len(),
        if exact { "" } else { " (perturbed metric: differences are the perturbation)" }
    );
    Ok(())
}

fn run_foliation(ctx: &Context) -> Result<Foliation, CliError> {
    let volumes = ctx.leaf_volumes()?;
    let fol = foliate_with(&ctx.metric, &volumes, &ctx.solver_options())?;
    if let Some(f) = fol.failure {
        return Err(CliError::Core(f.error));
    }
    Ok(fol)
}

fn foliate(ctx: &mut Context) -> Result<(), CliError> {
    let fol = run_foliation(ctx)?;
    let records: Vec<LeafRecord> = fol.leaves.iter().map(LeafRecord::from_leaf).collect();
    let mut leaves = Table::new(&[
        "volume",
        "base_radius",
        "h",
        "h_mean",
        "h_osc",
        "sup_u",
        "sup_grad_u",
        "sup_hess_u",
        "newton_steps",
        "lowest_jacobi_mean_zero",
        "vp_stable",
        "trusted",
    ]);
    for l in &fol.leaves {
        let d = &l.diagnostics;
        leaves.push(vec![
            fmt(l.volume),
            fmt(d.base_radius),
            fmt(d.h_target),
            fmt(d.h_mean),
            fmt(d.h_osc),
            fmt(d.sup_u),
            fmt(d.sup_grad_u),
            fmt(d.sup_hess_u),
            d.newton_steps.to_string(),
            fmt(d.jacobi_eigenvalues[0]),
            d.vp_stable.to_string(),
            d.trusted.to_string(),
        ]);
    }
    let r = &fol.report;
    let mut report = Table::new(&["quantity", "value"]);
    for (k, v) in [
        ("min_gap", fmt(r.min_gap)),
        ("nested", r.nested.to_string()),
        ("h_decreasing", r.h_decreasing.to_string()),
        ("sup_u_decreasing", r.sup_u_decreasing.to_string()),
        ("sup_u_slope", r.sup_u_slope.map_or("".into(), fmt)),
        ("all_vp_stable", r.all_vp_stable.to_string()),
        ("all_trusted", r.all_trusted.to_string()),
        ("max_newton_steps", r.max_newton_steps.to_string()),
    ] {
        report.push(vec![k.to_string(), v]);
    }
    ctx.json("leaves.json", &records)?;
    ctx.csv("leaves.csv", &leaves)?;
    ctx.csv("foliation_report.csv", &report)?;
    println!(
        "{} leaves, nested = {}, H decreasing = {}, all volume-preserving stable = {}",
        fol.leaves.len(),
        r.nested,
        r.h_decreasing,
        r.all_vp_stable
    );
    for l in &fol.leaves {
        println!(
            "  r = {:>12.6}  H = {:.12}  sup|u| = {:.3e}",
            l.diagnostics.base_radius, l.diagnostics.h_target, l.diagnostics.sup_u
        );
    }
    Ok(())
}

fn stability(ctx: &mut Context) -> Result<(), CliError> {
    let fol = run_foliation(ctx)?;
    let mut table = Table::new(&[
        "leaf",
        "volume",
        "base_radius",
        "constraint",
        "index",
        "eigenvalue",
    ]);
    for (i, l) in fol.leaves.iter().enumerate() {
        let spec = jacobi_spectrum(&ctx.metric, &l.graph, ctx.settings.count)?;
        for (kind, values) in [("mean_zero", &spec.mean_zero), ("none", &spec.unconstrained)] {
            for (k, v) in values.iter().enumerate() {
                table.push(vec![
                    i.to_string(),
                    fmt(l.volume),
                    fmt(l.graph.base_radius()),
                    kind.to_string(),
                    k.to_string(),
                    fmt(*v),
                ]);
            }
        }
        println!(
            "  leaf {i}: r = {:.6}, lowest mean-zero eigenvalue {:.6e}, stable = {}",
            l.graph.base_radius(),
            spec.mean_zero[0],
            spec.vp_stable
        );
    }
    ctx.csv("jacobi.csv", &table)?;
    Ok(())
}

pub fn cone_angle_verdict(r: &ConeAngleReport) -> &'static str {
    match (r.ricci_hypothesis, r.rigidity) {
        (true, true) => "equality: the cone is Euclidean space",
        (true, false) => "cone angle < 1 as required under Ric_L >= m - 2",
        (false, _) => "Ric_L >= m - 2 fails on the link; no bound asserted",
    }
}

fn cone_angle_cmd(ctx: &mut Context) -> Result<(), CliError> {
    let report = cone_angle(ctx.metric.link())?;
    let mut slabs = Vec::new();
    let mut table = Table::new(&["r", "ratio", "huisken", "cy", "cy_passes", "h_sq_integral"]);
    for r in ctx.radii() {
        let iso = iso_report(&ctx.metric, Region::Slab(r))?;
        let opt = |x: Option<f64>| x.map_or(String::new(), fmt);
        table.push(vec![
            fmt(r),
            fmt(iso.ratio),
            opt(iso.huisken_value),
            opt(iso.cy.map(|c| c.value)),
            iso.cy.map_or(String::new(), |c| c.passes.to_string()),
            opt(iso.h_sq_integral),
        ]);
        slabs.push(json!({
            "r": r,
            "ratio": iso.ratio,
            "cone_angle_exact": iso.cone_angle_exact,
            "huisken_value": iso.huisken_value,
            "cy_value": iso.cy.map(|c| c.value),
            "cy_passes": iso.cy.map(|c| c.passes),
            "cy_passes_genus_zero": iso.cy.map(|c| c.passes_genus_zero),
            "h_sq_integral": iso.h_sq_integral,
        }));
    }
    let verdict = cone_angle_verdict(&report);
    let doc = json!({
        "cone_angle": report.value,
        "ricci_lower_bound": report.ricci_lower_bound,
        "ricci_hypothesis": report.ricci_hypothesis,
        "bound_holds": report.bound_holds,
        "rigidity": report.rigidity,
        "verdict": verdict,
        "slabs": slabs,
    });
    ctx.json("iso.json", &doc)?;
    ctx.csv("slabs.csv", &table)?;
    println!("cone angle = {:.15}: {verdict}", report.value);
    Ok(())
}

fn profile(ctx: &mut Context) -> Result<(), CliError> {
    let rows = levy_gromov_check(ctx.metric.link(), &ctx.settings.betas)?;
    let mut table = Table::new(&[
        "beta",
        "link_estimate",
        "sphere_profile",
        "method",
        "upper_bound",
        "verdict",
    ]);
    for r in &rows {
        table.push(vec![
            fmt(r.beta),
            fmt(r.link_estimate),
            fmt(r.sphere_profile),
            format!("{:?}", r.method),
            r.is_upper_bound.to_string(),
            r.verdict.as_str().to_string(),
        ]);
    }
    ctx.csv("profile.csv", &table)?;
    for r in &rows {
        println!(
            "  beta = {:.4}  link {:.10}  sphere {:.10}  {}",
            r.beta,
            r.link_estimate,
            r.sphere_profile,
            r.verdict.as_str()
        );
    }
    Ok(())
}

fn verify_cmd(ctx: &mut Context) -> Result<(), CliError> {
    let checks = verify::run_suite(ctx)?;
    let table = verify::to_table(&checks);
    ctx.csv("verify.csv", &table)?;
    print!("{}", verify::render(&checks));
    let failed = checks
        .iter()
        .filter(|c| c.status == verify::Status::Fail)
        .count();
    if failed > 0 {
        return Err(CliError::VerifyFailed(failed));
    }
    Ok(())
}
