use thiserror::Error;

/// Errors produced by the simulation engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not symmetric (max asymmetry {residual:.3e} > {tol:.3e})")]
    NotSymmetric { residual: f64, tol: f64 },
    #[error("Green's function is not symplectic (residual {residual:.3e} > {tol:.3e})")]
    NotSymplectic { residual: f64, tol: f64 },
    #[error("Green's function is not unitary (residual {residual:.3e} > {tol:.3e})")]
    NotUnitary { residual: f64, tol: f64 },
    #[error("covariance matrix is unphysical: {0}")]
    Unphysical(String),
    #[error("solver failed to converge: {0}")]
    NonConvergence(String),
    #[error("sampler truncation mass loss {lost:.3e} exceeds {tol:.3e}")]
    TruncationLoss { lost: f64, tol: f64 },
    #[error("unsupported moment pattern: {0}")]
    UnsupportedPattern(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
