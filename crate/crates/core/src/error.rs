use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested accuracy could not be certified.
    #[error("tolerance {requested:e} not met (achieved error estimate {achieved:e})")]
    ToleranceNotMet { requested: f64, achieved: f64 },

    /// The evaluation cap was hit before the error estimate dropped below the tolerance.
    #[error(
        "evaluation budget exhausted after {evaluations} evaluations \
         (best value {value}, error estimate {err_estimate:e})"
    )]
    BudgetExceeded {
        value: f64,
        err_estimate: f64,
        evaluations: usize,
    },

    #[error("nodes {first} and {second} coincide (gap {gap:e})")]
    DuplicateNode { first: usize, second: usize, gap: f64 },

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("power iteration did not converge in {iterations} iterations (best estimate {estimate})")]
    MaxIterations { iterations: usize, estimate: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of the numerics themselves (budget, tolerance, convergence),
    /// as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ToleranceNotMet { .. } | Error::BudgetExceeded { .. } | Error::MaxIterations { .. }
        )
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
