use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("structural error: {0}")]
    Structure(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("divergent integral: {0}")]
    Divergence(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("size limit exceeded: {0}")]
    Size(String),
    #[error("not implemented: {0}")]
    NotImplemented(String),
    #[error("truncation did not converge: {0}")]
    Truncation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
