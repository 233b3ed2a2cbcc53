use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid kernel spec: {0}")]
    InvalidSpec(String),
    #[error("argument outside the domain of definition: {0}")]
    Domain(String),
    #[error("t = {t} outside tabulated range [{lo}, {hi}]")]
    Range { t: f64, lo: f64, hi: f64 },
    #[error("divergent integral: {0}")]
    Divergence(String),
    #[error("grid has {nodes} nodes, limit is {limit}")]
    Capacity { nodes: usize, limit: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
