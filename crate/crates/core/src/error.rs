use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} = {value} outside admissible range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("eigensolver did not reach tolerance (residual {residual:.3e})")]
    EigenSolver { residual: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (last residual {last:.3e})")]
    NonConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    /// The linearized mean curvature operator is not invertible on the link.
    #[error(
        "hypothesis violated: lambda_1(-Delta_L) = {lambda1} must exceed m - 1 = {threshold} \
         for the canonical CMC foliation to exist"
    )]
    HypothesisViolation { lambda1: f64, threshold: f64 },

    #[error("consistency failure: {0}")]
    Consistency(String),

    #[error("loss of graph regularity: {0}")]
    GraphRegularity(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
