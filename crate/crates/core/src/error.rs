//! Error taxonomy shared by every module in the crate.

use num_complex::Complex64;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building, projecting, or analysing a
/// model.  Variants carry the quantities a caller needs to react (achieved
/// pool size, offending shift, stability margin, ...).
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix or configuration dimension is inconsistent or unusable.
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// An input violates a documented calling contract (asymmetry, length
    /// mismatch, non-positive tolerance, ...).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A benchmark or run configuration is rejected before any computation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Transfer-function evaluation hit a (near-)singular shifted solve: the
    /// evaluation point is numerically indistinguishable from a pole.
    #[error("evaluation point is numerically at a system pole")]
    NearPole,

    /// An interpolation shift collided with the spectrum of `A`.
    #[error("shift {shift} is numerically in the spectrum of A")]
    ShiftCollision { shift: Complex64 },

    /// The candidate pool was exhausted before the requested basis was full.
    #[error("candidate pool exhausted: accepted {accepted} of {needed} basis columns")]
    InsufficientPool { accepted: usize, needed: usize },

    /// The skew pairing of the trial basis is (numerically) rank deficient.
    #[error("degenerate symplectic pairing: smallest block weight {min_alpha:.3e}")]
    DegeneratePairing { min_alpha: f64 },

    /// A trial basis failed the symplectic-column check.
    #[error("trial basis is not symplectic: defect {defect:.3e}")]
    NonSymplecticBasis { defect: f64 },

    /// A matrix required to be Hurwitz is not; `margin` is the largest real
    /// part over its spectrum.
    #[error("matrix is not Hurwitz: spectral abscissa {margin:.6e}")]
    Unstable { margin: f64 },

    /// An iterative kernel (Schur, eigenvalue, small dense solve) failed to
    /// deliver a usable factorization.
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    /// A text matrix or configuration file failed to parse.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable code, used in batch CSV outputs.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidDimension(_) => "invalid-dimension",
            Error::ContractViolation(_) => "contract-violation",
            Error::InvalidConfig(_) => "invalid-config",
            Error::NearPole => "near-pole",
            Error::ShiftCollision { .. } => "shift-collision",
            Error::InsufficientPool { .. } => "insufficient-pool",
            Error::DegeneratePairing { .. } => "degenerate-pairing",
            Error::NonSymplecticBasis { .. } => "non-symplectic-basis",
            Error::Unstable { .. } => "unstable",
            Error::NumericalBreakdown(_) => "numerical-breakdown",
            Error::Parse { .. } => "parse-error",
            Error::Io(_) => "io-error",
        }
    }
}
