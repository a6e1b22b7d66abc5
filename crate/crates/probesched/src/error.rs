//! Crate-wide error type.

use thiserror::Error;

use crate::instance::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The instance violates a structural rule (duplicate id, unknown
    /// element reference, ...). Raised at construction time.
    #[error("malformed instance: {0}")]
    Malformed(String),

    /// The instance fails semantic validation (empty test, uncovered
    /// element, non-positive weight, detection probability out of range).
    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),

    /// A generator was asked for a degenerate or oversized construction.
    #[error("generator: {0}")]
    Generator(String),

    /// An element has no probing coverage under the given frequencies;
    /// its expected detection time is infinite.
    #[error("element {0:?} has no coverage (infinite detection time)")]
    Uncovered(String),

    /// An iterative solver hit its iteration budget before meeting the
    /// convergence criteria.
    #[error("solver did not converge within {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Exhaustive search would exceed the configured node cap.
    #[error("search space too large: {0}")]
    CapExceeded(String),

    /// Infeasible input to a construction (Kraft sum above one, level
    /// budget too small, ...).
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("parse: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the CLI: 1 validation, 2 solver
    /// non-convergence, 3 I/O and parsing.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Malformed(_)
            | Error::Invalid(_)
            | Error::Generator(_)
            | Error::Uncovered(_)
            | Error::CapExceeded(_)
            | Error::Infeasible(_)
            | Error::EmptyInput(_) => 1,
            Error::NoConvergence { .. } => 2,
            Error::Parse(_) | Error::Io(_) => 3,
        }
    }
}
