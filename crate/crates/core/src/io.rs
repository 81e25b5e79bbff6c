//! Serializable descriptions of links, metrics and leaves.
//!
//! Fields on S² are written as `[l, m, coefficient]` triples over the real
//! spherical harmonics, together with the truncation degree.

use serde::{Deserialize, Serialize};

use crate::cmc::{Leaf, RadialGraph};
use crate::cone::{AsymptoticConeMetric, Perturbation, RadialProfile};
use crate::link::LinkMetric;
use crate::spectral::SpectralField;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub degree: usize,
    #[serde(default)]
    pub coefficients: Vec<(usize, i64, f64)>,
}

impl FieldSpec {
    pub fn build(&self) -> Result<SpectralField> {
        SpectralField::from_triples(self.degree, &self.coefficients)
    }

    pub fn from_field(field: &SpectralField) -> Self {
        Self {
            degree: field.degree(),
            coefficients: field.triples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinkSpec {
    /// Round sphere of dimension `dim` and the given radius.
    ScaledSphere { dim: usize, radius: f64 },
    /// `e^{2φ} g_{S²}` with φ given by its coefficients.
    ConformalS2 {
        degree: usize,
        #[serde(default)]
        coefficients: Vec<(usize, i64, f64)>,
    },
}

impl LinkSpec {
    pub fn build(&self) -> Result<LinkMetric> {
        match self {
            Self::ScaledSphere { dim, radius } => LinkMetric::scaled_sphere(*dim, *radius),
            Self::ConformalS2 {
                degree,
                coefficients,
            } => LinkMetric::conformal_s2(SpectralField::from_triples(*degree, coefficients)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationSpec {
    Power {
        tau: f64,
        amplitude: f64,
        #[serde(default)]
        field: Option<FieldSpec>,
    },
    PowerLog {
        tau: f64,
        amplitude: f64,
        #[serde(default)]
        field: Option<FieldSpec>,
    },
    Bump {
        center: f64,
        width: f64,
        amplitude: f64,
        #[serde(default)]
        field: Option<FieldSpec>,
    },
}

impl PerturbationSpec {
    pub fn build(&self) -> Result<Perturbation> {
        let (profile, field) = match self {
            Self::Power {
                tau,
                amplitude,
                field,
            } => (
                RadialProfile::Power {
                    tau: *tau,
                    amplitude: *amplitude,
                },
                field,
            ),
            Self::PowerLog {
                tau,
                amplitude,
                field,
            } => (
                RadialProfile::PowerLog {
                    tau: *tau,
                    amplitude: *amplitude,
                },
                field,
            ),
            Self::Bump {
                center,
                width,
                amplitude,
                field,
            } => (
                RadialProfile::Bump {
                    center: *center,
                    width: *width,
                    amplitude: *amplitude,
                },
                field,
            ),
        };
        let field = field.as_ref().map(FieldSpec::build).transpose()?;
        Perturbation::new(profile, field)
    }
}

/// `g = (1 + α) dr² + r² (1 + β) g_L` on `[r_min, r_max] × L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub link: LinkSpec,
    pub r_min: f64,
    pub r_max: f64,
    #[serde(default)]
    pub alpha: Option<PerturbationSpec>,
    #[serde(default)]
    pub beta: Option<PerturbationSpec>,
}

impl MetricSpec {
    pub fn build(&self) -> Result<AsymptoticConeMetric> {
        let alpha = self.alpha.as_ref().map(PerturbationSpec::build).transpose()?;
        let beta = self.beta.as_ref().map(PerturbationSpec::build).transpose()?;
        AsymptoticConeMetric::new(self.link.build()?, self.r_min, self.r_max, alpha, beta)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A solved leaf: `r = base_radius (1 + u)` with u in coefficient form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafRecord {
    pub volume: f64,
    pub base_radius: f64,
    pub h: f64,
    pub degree: usize,
    pub coefficients: Vec<f64>,
}

impl LeafRecord {
    pub fn from_leaf(leaf: &Leaf) -> Self {
        Self {
            volume: leaf.volume,
            base_radius: leaf.graph.base_radius(),
            h: leaf.diagnostics.h_target,
            degree: leaf.graph.degree(),
            coefficients: leaf.graph.u().coefficients().to_vec(),
        }
    }

    pub fn graph(&self) -> Result<RadialGraph> {
        RadialGraph::new(
            self.base_radius,
            SpectralField::from_coefficients(self.degree, self.coefficients.clone())?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_round_trip() {
        let text = r#"{
            "link": {"kind": "scaled_sphere", "dim": 2, "radius": 0.8},
            "r_min": 1.0, "r_max": 200.0,
            "alpha": {"profile": "power", "tau": 1.0, "amplitude": 0.1,
                      "field": {"degree": 2, "coefficients": [[0, 0, 1.0], [1, 0, 0.3]]}}
        }"#;
        let spec = MetricSpec::from_json(text).unwrap();
        let again: MetricSpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, again);
        let m = spec.build().unwrap();
        assert!(!m.is_exact_cone());
        assert_eq!(m.dim(), 3);
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let text = r#"{"link": {"kind": "scaled_sphere", "dim": 2, "radius": 0.8, "x": 1},
                       "r_min": 1.0, "r_max": 2.0}"#;
        assert!(matches!(MetricSpec::from_json(text), Err(crate::Error::Parse(_))));
    }
}
