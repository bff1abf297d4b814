use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("slot length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("multiplicative depth exhausted in {stage} (level {level})")]
    DepthExhausted { stage: String, level: usize },

    #[error("input of length {len} does not fit into {slots} slots")]
    InputTooLong { len: usize, slots: usize },

    #[error("rotation step {step} out of range for {slots} slots")]
    RotationOutOfRange { step: isize, slots: usize },

    #[error("invalid backend configuration: {0}")]
    InvalidConfig(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("remez exchange did not converge after {iterations} iterations (spread {spread:.3e})")]
    RemezNonConvergence { iterations: usize, spread: f64 },

    #[error("composite sign reached error {achieved:.3e}, target {target:.3e}")]
    CompositeSignAccuracy { achieved: f64, target: f64 },

    #[error("packing overflow: {needed} slots needed, {slots} available")]
    PackingOverflow { needed: usize, slots: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("input {value} outside comparator range")]
    InputOutOfRange { value: f64 },

    #[error("insufficient knots: {knots} knots for degree {degree}")]
    InsufficientKnots { knots: usize, degree: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("singular least-squares system: {0}")]
    SingularSystem(String),

    #[error("model schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("corrupt file: {0}")]
    CorruptFile(String),

    #[error("depth budget infeasible: {0}")]
    DepthBudgetInfeasible(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::CorruptFile(e.to_string())
    }
}
