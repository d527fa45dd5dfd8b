use thiserror::Error;

/// Errors raised by the numerical routines and the data model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("polygamma order {0} exceeds the supported maximum of {max}", max = crate::specfun::MAX_POLYGAMMA_ORDER)]
    UnsupportedOrder(u32),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),

    #[error("W11 of the complete block is singular or ill-conditioned (condition estimate {0:e})")]
    SingularMatrix(f64),

    #[error("non-positive determinant of {0}")]
    NonPositiveDeterminant(&'static str),

    #[error("log-space overflow while evaluating {0}")]
    Overflow(&'static str),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("integral diverges: {0}")]
    Divergence(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidDesign(_) | Error::InvalidSample(_) | Error::InvalidPlan(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
