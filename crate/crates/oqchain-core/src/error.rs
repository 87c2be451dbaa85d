use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("numerical singularity: {0}")]
    Singular(String),

    #[error("no unique steady state: {0}")]
    NonUniqueSteadyState(String),

    #[error("ill-conditioned solve: {0}")]
    IllConditioned(String),

    #[error("Fock truncation insufficient: {0}")]
    Truncation(String),

    #[error(transparent)]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
