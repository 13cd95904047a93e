use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Two eigenvectors coalesce (exceptional point) or the normalization
    /// factor of the analytic eigenvector vanishes.
    #[error("degenerate point at k = {k}: {reason}")]
    Degenerate { k: f64, reason: String },

    #[error("no exceptional point: {0}")]
    NoExceptionalPoint(String),

    /// The support of the wavefunction reached the seam of the ring.
    #[error("wavefunction reached the lattice boundary at step {step} (N = {sites})")]
    BoundaryOverflow { step: usize, sites: usize },

    #[error("eigensolver did not converge after {iterations} iterations ({found} of {size} eigenvalues found)")]
    SolverFailure {
        iterations: usize,
        found: usize,
        size: usize,
    },

    #[error("singular eigenvalue: {0}")]
    SingularEigenvalue(String),

    #[error("growth regime could not be classified (max |P - 1| = {max_deviation})")]
    Unclassified { max_deviation: f64 },
}

pub type Result<T> = std::result::Result<T, WalkError>;

pub(crate) fn invalid(msg: impl Into<String>) -> WalkError {
    WalkError::InvalidParameter(msg.into())
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {value}")))
    }
}
