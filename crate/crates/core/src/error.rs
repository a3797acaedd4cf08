use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid functions live on different grids")]
    GridMismatch,
    #[error("derivative order {0} exceeds the cap of 4")]
    OrderCap(usize),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A hypothesis of the estimate being measured does not hold.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
