//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("not a unitary matrix: {0}")]
    NotUnitary(String),

    #[error("not a Clifford unitary: {0}")]
    NotClifford(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid probability: {0}")]
    InvalidProbability(String),

    #[error("invalid noise schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
