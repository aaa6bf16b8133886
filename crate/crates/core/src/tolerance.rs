//! Fixed numerical tolerances shared by construction checks, kernels and tests.
//!
//! All thresholds live in one record so that property tests and runtime
//! validation agree on what "orthogonal" or "skew" means.

/// Tolerance record. Use [`TOL`] unless an experiment needs different values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Maximum `|S_ij + S_ji|` accepted when constructing a [`crate::SkewMatrix`].
    pub skew: f64,
    /// Maximum `||Q^T Q - I||_F` accepted when constructing a [`crate::Rotation`].
    pub orthogonality: f64,
    /// Maximum `||X^T X - I||_F` accepted for a Stiefel point.
    pub stiefel: f64,
    /// Maximum defect of `X^T xi + xi^T X` for a tangent vector.
    pub tangent: f64,
    /// Eigenvalues of a rotation closer than this to -1 are treated as exactly -1
    /// and paired by the canonical policy.
    pub minus_one_merge: f64,
    /// Distance to -1 that triggers `NegativeEigenvalueAmbiguity` in strict mode.
    pub minus_one_strict: f64,
    /// Residual below which a conjugate-point witness is accepted.
    pub witness: f64,
    /// Slack in the strict test `L < rho - slack` of the certificate loop.
    pub certificate_slack: f64,
    /// Relative off-diagonal threshold that stops the Hermitian Jacobi sweeps.
    pub jacobi: f64,
}

pub const TOL: Tolerances = Tolerances {
    skew: 1e-13,
    orthogonality: 1e-12,
    stiefel: 1e-10,
    tangent: 1e-10,
    minus_one_merge: 1e-11,
    minus_one_strict: 1e-9,
    witness: 1e-9,
    certificate_slack: 1e-12,
    jacobi: 1e-17,
};

impl Default for Tolerances {
    fn default() -> Self {
        TOL
    }
}
