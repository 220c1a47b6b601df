use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-manifold incidence: {0}")]
    NonManifold(String),
    #[error("inconsistent orientation: {0}")]
    Unoriented(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degree mismatch: {0}")]
    Degree(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
