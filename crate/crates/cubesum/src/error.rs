use thiserror::Error;

/// Errors produced by the library.
///
/// Evaluators are total wherever the mathematics allows it, so the only
/// failures are malformed arguments and the cost guards that keep desk-scale
/// computations from running away.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cost guard: {what} is {value}, limit {limit}")]
    CostGuard {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("quadrature budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn guard(what: &'static str, value: u128, limit: u128) -> Result<()> {
    if value > limit {
        Err(Error::CostGuard { what, value, limit })
    } else {
        Ok(())
    }
}
