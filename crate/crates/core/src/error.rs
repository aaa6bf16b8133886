use thiserror::Error;

/// Errors raised by the geometry kernels and the certificate driver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not skew-symmetric (max |S + S^T| = {defect:e})")]
    NotSkew { defect: f64 },

    #[error("matrix is not special orthogonal (||Q^T Q - I||_F = {defect:e}, det = {det})")]
    NotSpecialOrthogonal { defect: f64, det: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("columns are not orthonormal (||X^T X - I||_F = {defect:e})")]
    NotStiefel { defect: f64 },

    #[error("tangent vector violates X^T xi + xi^T X = 0 (defect {defect:e})")]
    NotTangent { defect: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid dimensions n = {n}, p = {p}: {reason}")]
    InvalidDims { n: usize, p: usize, reason: &'static str },

    #[error("beta must be a positive finite number, got {0}")]
    InvalidBeta(f64),

    #[error("radius must be a positive finite number, got {0}")]
    InvalidRadius(f64),

    #[error("time parameter must be nonzero")]
    ZeroTime,

    #[error("cannot normalize the zero tangent vector")]
    ZeroTangent,

    #[error("rotation has an eigenvalue within {distance:e} of -1; the skew logarithm is not unique")]
    NegativeEigenvalueAmbiguity { distance: f64 },

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
