use thiserror::Error;

/// Errors raised by the pricing and boundary solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0} is not supported for this operation")]
    Unsupported(String),

    #[error("root finding failed: {0}")]
    RootNotBracketed(String),

    #[error("fixed-point iteration did not converge at time level {level} (residual {residual:e})")]
    FixedPointDivergence { level: usize, residual: f64 },

    #[error("PSOR did not converge at time level {level} after {iterations} sweeps (last update {update:e})")]
    PsorDivergence { level: usize, iterations: usize, update: f64 },

    #[error("tridiagonal pivot breakdown at row {row} (pivot {pivot:e}); {context}")]
    PivotBreakdown { row: usize, pivot: f64, context: String },

    #[error("boundary curve does not cover [{from}, {to}]")]
    BoundaryCoverage { from: f64, to: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("negative moment radicand {radicand:e}: second moment below squared first moment")]
    NegativeRadicand { radicand: f64 },

    #[error("sweep cell (r = {r}, q = {q}) failed: {source}")]
    SweepCell { r: f64, q: f64, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
