use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TvError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("invalid exponent p = {0} (need p >= 1)")]
    InvalidExponent(f64),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("no convergence after {iterations} iterations (achieved {achieved:e})")]
    Convergence { iterations: usize, achieved: f64 },
}

impl TvError {
    /// Stable machine-readable tag, used by the CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            TvError::InvalidInput(_) => "invalid-input",
            TvError::InvalidWeight(_) => "invalid-weight",
            TvError::InvalidExponent(_) => "invalid-exponent",
            TvError::Geometry(_) => "geometry",
            TvError::Degenerate(_) => "degenerate-geometry",
            TvError::Domain(_) => "domain",
            TvError::NotApplicable(_) => "not-applicable",
            TvError::InvariantViolation(_) => "invariant-violation",
            TvError::Convergence { .. } => "convergence",
        }
    }
}

pub type Result<T> = std::result::Result<T, TvError>;
