use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {0} out of range (supported: 1..=3)")]
    QubitCount(usize),

    #[error("invalid Pauli string {0:?}")]
    InvalidPauli(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("theta = {0} lies on a sign-flip boundary of the adaptive witness")]
    WitnessBoundary(f64),

    #[error("state has support outside the repetition codespace (leakage {0:.3e})")]
    OutsideCodespace(f64),

    #[error("error {0} is not correctable by the repetition code")]
    NotCorrectable(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cache file: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
