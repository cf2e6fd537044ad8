use thiserror::Error;

/// Errors raised by samplers, estimators and the enumeration oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate bivariate pmf: pair ({i}, {j}) has zero probability")]
    DegeneratePmf { i: usize, j: usize },
    #[error("unsupported sampling path: {0}")]
    UnsupportedPath(String),
    #[error("inconsistent distribution: {0}")]
    InconsistentDistribution(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
