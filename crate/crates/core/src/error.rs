use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} = {value} exceeds the available bound {limit}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        limit: u64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("enumeration of {cardinality} entries exceeds the cap of {cap}")]
    ResourceLimit { cardinality: u128, cap: u64 },

    #[error("Euler factor at p = {prime} is not positive ({factor}); its logarithm is undefined")]
    NonPositiveFactor { prime: u64, factor: f64 },

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },

    #[error("prime cache: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
