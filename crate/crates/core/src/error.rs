use thiserror::Error;

/// Errors produced by the filtering toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Model coefficients violate one of `|a| < 1`, `b > 0`, `B > 0`, `A != 0`,
    /// or are not finite.
    #[error("degenerate model: constraint `{0}` violated")]
    DegenerateModel(&'static str),

    #[error("observation sequence is empty")]
    EmptyObservations,

    #[error("step {step} out of range for a sequence of length {len}")]
    StepOutOfRange { step: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid too coarse: posterior mass {mass:e} at the grid boundary after step {step}")]
    GridTooCoarse { step: usize, mass: f64 },

    #[error("psi recurrence overflows at index {index}; use the stable coefficient path")]
    PsiOverflow { index: usize },

    #[error("the psi recurrence divides by a and is undefined for a = 0")]
    UnsupportedZeroA,

    #[error("matrix is singular: pivot {pivot} has magnitude {magnitude:e}")]
    SingularMatrix { pivot: usize, magnitude: f64 },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    /// Malformed CSV input; `line` is 1-based and counts the header.
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },

    /// Parameter JSON is syntactically broken.
    #[error("malformed parameter JSON: {0}")]
    Json(String),

    /// Parameter JSON parses but does not describe a valid model.
    #[error("invalid parameters: {0}")]
    Params(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
