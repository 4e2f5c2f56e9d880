use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("generator matrix is singular (|det| = {det:e}, tolerance {tolerance:e})")]
    Singular { det: f64, tolerance: f64 },

    #[error("matrix must be square: got {rows} rows with {cols} columns")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("unknown lattice `{0}`")]
    UnknownLattice(String),

    #[error("lattice `{0}` has no generator matrix (constant-only catalog entry)")]
    NoGenerator(String),

    #[error("sphere decoder exceeded its budget of {0} nodes")]
    SearchBudgetExceeded(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
