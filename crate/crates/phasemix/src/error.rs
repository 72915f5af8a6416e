//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by model validation, numerical evaluation, and classification.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The initial vector is not a probability vector.
    #[error("initial vector is not stochastic: {0}")]
    NonStochasticInitial(String),

    /// The matrix violates the sub-intensity sign/row-sum constraints.
    #[error("matrix is not a sub-intensity matrix: {0}")]
    NotSubIntensity(String),

    /// Eigenvalues have imaginary parts above tolerance.
    #[error("sub-intensity matrix has complex eigenvalues: {0}")]
    ComplexSpectrum(String),

    /// Jordan block detection and coefficient extraction disagree.
    #[error("spectral decomposition failed: {0}")]
    DefectiveDecompositionFailure(String),

    /// The matrix exponential produced non-finite entries.
    #[error("matrix exponential failed: {0}")]
    MatexpFailure(String),

    /// A linear solve against the sub-intensity matrix broke down.
    #[error("singular matrix encountered: {0}")]
    SingularMatrix(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    QuadratureNonconvergence(String),

    /// The certified series truncation bound was violated.
    #[error("series truncation bound violated: {0}")]
    TruncationBoundViolated(String),

    /// The coarse scan found more than one local maximum.
    #[error("summand is not unimodal: {0}")]
    UnimodalityCheckFailed(String),

    /// Argument outside the mathematical domain of the function.
    #[error("domain error: {0}")]
    DomainError(String),

    /// The requested tolerance is unreachable for these arguments.
    #[error("precision loss: {0}")]
    PrecisionLoss(String),

    /// The scaling family does not have a regularly varying tail.
    #[error("scaler is not regularly varying: {0}")]
    NotRegularlyVarying(String),

    /// Norming constants requested for a non-Frechet report.
    #[error("report is not in the Frechet domain: {0}")]
    NotFrechet(String),

    /// A model file failed schema or invariant validation.
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
