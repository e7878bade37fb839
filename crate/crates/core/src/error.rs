use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    /// Eigenvector matrix is singular or too badly conditioned to expand in.
    #[error("eigenbasis is defective or near-defective (condition estimate {condition:.3e})")]
    DefectiveEigenbasis { condition: f64 },

    #[error("degenerate dark subspace: roots {first} and {second} are {separation:.3e} apart")]
    DegenerateSpectrum {
        first: usize,
        second: usize,
        separation: f64,
    },

    /// A right eigenvector with `v^T v ≈ 0` cannot be bi-orthogonally normalised.
    #[error("mode {mode} is self-orthogonal (|v^T v| = {norm:.3e})")]
    SelfOrthogonalMode { mode: usize, norm: f64 },

    #[error("adaptive step control failed at t = {t}: {reason}")]
    StepControl { t: f64, reason: String },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by a solver.
    pub fn is_invalid_input(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::GridTooCoarse(_))
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
