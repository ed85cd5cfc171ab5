use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),
    #[error("support warning: {0}")]
    Support(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("truncation warning: {0}")]
    Truncation(String),
    #[error("not a frame: {0}")]
    NoFrame(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
