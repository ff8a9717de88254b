use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the library's checked operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix trace {trace} is not 1 within {tol:.3e}")]
    NotUnitTrace { trace: f64, tol: f64 },

    #[error("t = {t} is within {dist:.3e} of the dephasing-rate pole at t = {pole}")]
    PoleProximity { t: f64, pole: f64, dist: f64 },

    #[error("parameter `{name}` must be strictly positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("invalid Renyi order {alpha}: {reason}")]
    InvalidRenyiOrder { alpha: f64, reason: &'static str },

    #[error("Tr(rho^alpha) = {value:.3e} is not positive; logarithm undefined")]
    LogUndefined { value: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("{0}")]
    InvalidInput(String),
}
