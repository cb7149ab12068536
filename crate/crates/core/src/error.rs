use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are incompatible.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A candidate basis vector was numerically contained in the current
    /// subspace (post-orthogonalization norm below the breakdown threshold).
    #[error("subspace exhausted: candidate vector lies in the current subspace")]
    SubspaceExhausted,

    /// The QR iteration failed to deflate an eigenvalue within the sweep cap.
    #[error("dense eigensolver failed to converge on eigenvalue {index} of a {dim}x{dim} matrix")]
    EigFailed { dim: usize, index: usize },

    /// A Chebyshev value would overflow (degree times log-magnitude too large).
    #[error("Chebyshev evaluation out of range: degree {m} at |w| = {w_abs:.3e}")]
    RangeExceeded { m: usize, w_abs: f64 },

    /// The three-term filter recurrence hit a vanishing denominator.
    #[error("degenerate Chebyshev filter: recurrence denominator {denom:.3e} at step {step}")]
    FilterDegenerate { step: usize, denom: f64 },

    /// The target value is not separated from the unwanted set, so no damping
    /// ellipse exists.
    #[error("no separation: target real part {target:.6e} does not exceed unwanted bound {x_plus:.6e}")]
    NoSeparation { target: f64, x_plus: f64 },

    /// Input file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A solver configuration violates its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
