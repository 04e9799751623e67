use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("insufficient sample: need at least {needed} observations, got {got}")]
    InsufficientSample { needed: usize, got: usize },

    #[error("brute-force enumeration needs {subsets} subsets, cap is {cap}")]
    OracleSize { subsets: u128, cap: u128 },

    #[error("calibration failure: {0}")]
    Calibration(String),
}
