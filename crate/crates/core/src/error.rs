use std::io;

use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A kernel was evaluated at a point where it is singular.
    #[error("singularity: {0}")]
    Singularity(String),

    /// A numerical routine did not reach its target accuracy.
    #[error("numeric error: {message} (estimate {estimate:e}, error {error:e}, evaluations {evaluations})")]
    Numeric {
        message: String,
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    /// A poorly conditioned local linear system.
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    /// A sampled supremum had no sample to take.
    #[error("coverage error: {0}")]
    Coverage(String),

    /// A point lies outside the domain of a map.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
