use thiserror::Error;

/// Errors raised by the library. Quadrature non-convergence is not an error; it is
/// reported through the flags on [`crate::TransformResult`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("function returned a non-finite value ({value}) at x = {x}")]
    NonFinite { x: f64, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("argument {t} outside sampled range [{min}, {max}]")]
    Range { t: f64, min: f64, max: f64 },

    #[error("integral appears divergent: {0}")]
    Divergent(String),

    #[error("quadrature did not converge: {0}")]
    NotConverged(String),

    #[error("ill-conditioned inversion: {0}")]
    IllConditioned(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Builds an [`Error::Domain`] from a format string.
macro_rules! domain_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(format!($($arg)*))
    };
}
pub(crate) use domain_err;
