use thiserror::Error;

/// Errors raised by the models and their numerical kernels.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("quadrature did not converge: best estimate {estimate:e}, estimated error {error:e}")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("integration failure at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("oracle invalid at t = {t}: {reason}")]
    OracleInvalid { t: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
