use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    Asymmetric { row: usize, col: usize },

    #[error("positive diagonal required: entry ({index}, {index}) is {value}")]
    NonPositiveDiagonal { index: usize, value: f64 },

    #[error("invalid sparsity structure: {0}")]
    InvalidStructure(String),

    #[error("column {0} of the operator is zero")]
    ZeroColumn(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in iterate at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("insufficient history: need {needed} entries, have {have}")]
    InsufficientHistory { needed: usize, have: usize },

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("unsupported symmetry `{0}`: only `symmetric` matrices are accepted")]
    UnsupportedSymmetry(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
