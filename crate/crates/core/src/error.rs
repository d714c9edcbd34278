use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("quadrature did not converge on [{a}, {b}] (error estimate {est:.3e})")]
    QuadNoConverge { a: f64, b: f64, est: f64 },

    #[error("integrand appears non-integrable near {location}: refinement contributions do not decrease")]
    Divergent { location: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("io error: {0}")]
    Io(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
