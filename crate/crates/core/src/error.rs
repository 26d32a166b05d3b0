use thiserror::Error;

/// Errors raised by graph construction, state handling and propagation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph size {n}: {family} requires n >= {min}")]
    InvalidSize {
        family: &'static str,
        n: usize,
        min: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("graph generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("node index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("integration failed at t = {last_good_time}: {reason}")]
    IntegrationFailed { last_good_time: f64, reason: String },
    #[error("invalid fit input: {0}")]
    InvalidFitInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
