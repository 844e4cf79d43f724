use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: mode bound {left} vs {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("length mismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid too small: need mode bound {needed}, have {have}")]
    GridTooSmall { needed: usize, have: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("time grid is not strictly increasing at index {index}")]
    NonMonotoneTimes { index: usize },

    #[error("time grid is not uniform at index {index}")]
    NonUniformGrid { index: usize },

    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },

    #[error("tail energy fraction {fraction:e} exceeds {limit:e} at t = {time}")]
    TailEnergy { fraction: f64, limit: f64, time: f64 },

    #[error("fixed-point iteration diverged at iterate {iterate}")]
    Divergence { iterate: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("ensemble failure: {failed} of {total} members failed")]
    EnsembleFailure { failed: usize, total: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
