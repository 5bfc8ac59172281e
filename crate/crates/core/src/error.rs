use thiserror::Error;

/// Errors raised by the analysis kernel and the file front-end.
///
/// Strategy indices carried here are 0-based; messages print them 1-based.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QceError {
    #[error("matrix is not Hermitian: ‖A − A†‖_F = {defect:e} exceeds {allowed:e}")]
    NotHermitian { defect: f64, allowed: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid density state: {0}")]
    InvalidState(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("Hermitian condition holds at pair ({}, {}) within tolerance; no unitary deviation exists there", .i1 + 1, .i2 + 1)]
    ConditionNotViolated { i1: usize, i2: usize },

    #[error("no profitable deviation: {0}")]
    NotApplicable(String),

    #[error("Hermitian condition violated at pair ({}, {}): |difference| = {:e}", .i1 + 1, .i2 + 1, .difference)]
    HermitianConditionViolated {
        i1: usize,
        i2: usize,
        difference: f64,
    },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QceError>;
