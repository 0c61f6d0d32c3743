//! Error type shared across the library.

use thiserror::Error;

/// Errors reported by constructors, linear algebra, and evaluation routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Matrix or vector dimensions do not fit the operation.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A matrix failed a rank requirement (e.g. annihilator of a
    /// rank-deficient row set).
    #[error("rank deficiency: {0}")]
    Rank(String),

    /// Two eigenvalues that must be distinct coincide (within one spec, or
    /// across the upper and lower spectra).
    #[error("eigenvalue collision: {0}")]
    EigenvalueCollision(String),

    /// The exact backend was asked for a transcendental value (exponential
    /// of a nonzero scalar).
    #[error("unsupported on the exact backend: {0}")]
    BackendUnsupported(String),

    /// det(F·A·Cᵀ) = 0, so the model's big-cell normalization at t = 0 does
    /// not exist.
    #[error("det(F*A*C^T) = 0: model is degenerate at the origin")]
    SingularAtOrigin,

    /// The change-of-basis matrix K(D) is singular.
    #[error("K(D) is singular")]
    DegenerateK,

    /// A Miwa shift point z lies on the spectrum of B or D (or violates the
    /// analytic-regime requirement when that regime was requested).
    #[error("invalid shift point: {0}")]
    ShiftDomain(String),

    /// The tau function vanishes where a division by tau is required.
    #[error("tau vanishes at the requested point")]
    ZeroTau,

    /// A Vandermonde matrix that must be invertible is singular.
    #[error("degenerate Vandermonde matrix: {0}")]
    DegenerateVandermonde(String),

    /// A partition does not fit inside the required box.
    #[error("partition outside box: {0}")]
    OutsideBox(String),

    /// A square linear system is singular (internal solves; op-level code
    /// maps this onto a more specific variant where one applies).
    #[error("singular linear system: {0}")]
    Singular(String),

    /// A partition or Frobenius index violates its defining invariant.
    #[error("invalid partition data: {0}")]
    BadPartition(String),

    /// Invalid configuration or argument values.
    #[error("invalid input: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
