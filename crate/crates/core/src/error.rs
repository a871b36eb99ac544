use thiserror::Error;

/// Errors produced anywhere in the mechanism pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid privacy budget: {0}")]
    Budget(String),

    #[error("non-finite evaluation {value} at lattice point {point:?}")]
    Evaluation { point: Vec<f64>, value: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("training did not converge after {iterations} iterations (residual {residual:.3e})")]
    Training { iterations: usize, residual: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("lower-bound construction check failed: {0}")]
    Construction(String),

    #[error("unsupported format version {0}")]
    Version(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
