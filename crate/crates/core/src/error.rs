use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A precondition on the arguments was not met.
    #[error("contract violation: {0}")]
    Contract(String),
    /// The state has zero (or non-finite) norm and cannot be normalized.
    #[error("degenerate state: norm is {0}")]
    DegenerateState(f64),
    /// The requested order exceeds what the construction supports.
    #[error("unsupported order {order} (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },
    /// The grid is too narrow to hold the requested state.
    #[error("truncation: {0}")]
    Truncation(String),
    /// The operator lies outside the family an estimator can handle.
    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),
    /// A closed-form prediction was requested outside its domain.
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    /// A spectrum does not decay fast enough to be integrated.
    #[error("non-integrable spectrum: {0}")]
    NonIntegrable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::contract(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
