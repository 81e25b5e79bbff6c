//! Command-line driver: reads a JSON run configuration, runs one analysis
//! and writes CSV/JSON results plus a `metadata.json` sidecar.
//!
//! Exit codes: 0 success, 1 solver or verification failure, 2 configuration
//! error, 3 violated spectral hypothesis on the link.

// `!(x > 0.0)` is used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use coniso_core::Error;

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0} invariant(s) failed")]
    VerifyFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Core(Error::Parse(_)) => 2,
            CliError::Core(Error::HypothesisViolation { .. }) => 3,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Core(Error::HypothesisViolation { lambda1, threshold }) => format!(
                "the link violates the spectral gap hypothesis lambda_1(-Delta_L) > m - 1 \
                 required for the CMC foliation (lambda_1 = {lambda1}, m - 1 = {threshold}); \
                 round unit spheres sit exactly on the borderline"
            ),
            other => other.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "coniso", version, about = "Isoperimetry and CMC foliations of asymptotically conical 3-manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leaf volumes, comma separated.
    #[arg(long)]
    pub volumes: Option<String>,
    /// Volume fractions for the profile comparison, comma separated.
    #[arg(long)]
    pub betas: Option<String>,
    /// Number of eigenvalues to report.
    #[arg(long)]
    pub count: Option<usize>,
    /// Newton tolerance on the sup-norm residual.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Laplace spectrum of the link and the Lichnerowicz comparison.
    Spectrum(Common),
    /// Closed-form against finite-difference Ricci curvature, and decay norms.
    Curvature(Common),
    /// CMC foliation over a volume grid.
    Foliate(Common),
    /// Jacobi spectra of the foliation leaves.
    Stability(Common),
    /// Cone angle and isoperimetric functionals of slabs.
    ConeAngle(Common),
    /// Isoperimetric profile of the link against the round sphere.
    Profile(Common),
    /// Runs the invariant suite and prints a pass/fail table.
    Verify(Common),
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("coniso: {}", e.message());
            e.exit_code()
        }
    }
}
