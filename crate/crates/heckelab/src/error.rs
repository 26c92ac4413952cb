use num_bigint::BigInt;
use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("evaluation hits a pole at q = {0}")]
    Pole(BigInt),
    #[error("enumeration budget exceeded: {needed} items requested, limit {limit}")]
    Budget { needed: u128, limit: u128 },
    #[error("internal identity violated: {0}")]
    Identity(String),
    #[error("theorem check failed: {0}")]
    Theorem(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
