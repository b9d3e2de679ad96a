use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("label scores are not feasible: {0}")]
    Infeasible(String),

    #[error("label scores are not integral: {0}")]
    NotIntegral(String),

    #[error("naive oracle guard exceeded: n = {n} > {limit}")]
    GuardExceeded { n: usize, limit: usize },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
