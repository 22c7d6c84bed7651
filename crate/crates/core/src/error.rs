use thiserror::Error;

/// Errors surfaced by the verification toolbox.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Mismatched velocity dimensions between phase points or grids.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Evaluation requested outside the sampled box without zero extension.
    #[error("domain exit: {0}")]
    DomainExit(String),

    /// A quadrature tail estimate exceeded its budget.
    #[error("quadrature budget exceeded: {0}")]
    QuadratureBudget(String),

    /// An inverse fractional operator was fed data with nonzero mean.
    #[error("mean-zero violation: measured mean {measured:e} exceeds tolerance {tolerance:e}")]
    MeanNotZero { measured: f64, tolerance: f64 },

    /// Slope fits and survival estimates need a minimum amount of data.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Unknown suite name passed to the dispatcher.
    #[error("unknown suite: {0}")]
    UnknownSuite(String),

    /// Configuration file could not be parsed.
    #[error("config error: {0}")]
    Config(String),

    /// I/O failure while emitting reports.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
