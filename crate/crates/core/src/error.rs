//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by spectrum construction, simulation, fitting, and bound
/// evaluation.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its documented domain.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// 1-based index fell outside the working dimension.
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    /// Requested shard count does not divide the sample size.
    #[error(
        "cannot split n = {n} samples into m = {m} equal shards; \
         largest feasible shard count <= {m} is {suggestion}"
    )]
    Indivisible { n: usize, m: usize, suggestion: usize },

    /// Two linked quantities disagree in dimension.
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// Input contained NaN or infinity.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// An operation that needs at least one element received none.
    #[error("empty input: {0}")]
    Empty(&'static str),

    /// The effective-dimension scan found no admissible index within the
    /// working dimension.
    #[error("effective dimension is infinite within the working dimension ({working_dim})")]
    InfiniteEffectiveDimension { working_dim: usize },

    /// Ratio with a zero denominator.
    #[error("undefined ratio: {0} has zero denominator")]
    UndefinedRatio(&'static str),

    /// File access failed.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Text input failed to parse.
    #[error("parse error at {path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for [`Error::InvalidParameter`].
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
