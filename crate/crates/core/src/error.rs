use thiserror::Error;

/// Errors raised by parameter validation and the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {z} lies on the slit of a map with center {center} and time {t}")]
    OnSlit { z: String, center: String, t: f64 },

    #[error("adaptive quadrature did not converge on [{a}, {b}] (estimated error {err:e})")]
    Quadrature { a: f64, b: f64, err: f64 },

    #[error("unsupported covariance for stationary density: {0}")]
    Unsupported(String),

    #[error("iteration did not converge after {iters} steps (last L1 change {change:e})")]
    NoConvergence { iters: usize, change: f64 },

    #[error("inconsistent phase classification: {0}")]
    Inconsistent(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
