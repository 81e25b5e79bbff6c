//! Run configuration, read from JSON.

use std::path::{Path, PathBuf};

use coniso_core::io::MetricSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricSpec,
    /// Enclosed volumes of the leaves (foliate, stability).
    #[serde(default)]
    pub volumes: Option<Vec<f64>>,
    /// Leaf base radii, converted to volumes through the slab volume. Used
    /// when `volumes` is absent.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    /// Volume fractions for the profile comparison.
    #[serde(default)]
    pub betas: Option<Vec<f64>>,
    /// Number of eigenvalues reported.
    #[serde(default)]
    pub count: Option<usize>,
    /// Newton tolerance.
    #[serde(default)]
    pub tol: Option<f64>,
    /// Relative radial step of the Ricci finite differences.
    #[serde(default)]
    pub fd_step: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Settings after merging the config with command-line overrides.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub degree: usize,
    pub tol: f64,
    pub fd_step: f64,
    pub count: usize,
    pub betas: Vec<f64>,
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_FD_STEP: f64 = 1e-3;
pub const DEFAULT_COUNT: usize = 8;

/// β = 0.05, 0.10, …, 0.95.
pub fn default_betas() -> Vec<f64> {
    (1..20).map(|k| k as f64 / 20.0).collect()
}

/// Splits `a,b,c` into numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("'{s}': {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_list("1, 2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert!(parse_list("1,x").is_err());
        assert_eq!(default_betas().len(), 19);
    }
}
