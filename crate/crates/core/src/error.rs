use thiserror::Error;

/// Errors surfaced by the simulator, planner and harness.
#[derive(Debug, Error)]
pub enum NavError {
    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("placement failed: {0}")]
    PlacementFailed(String),

    #[error("no path from {start:?} to {goal:?}")]
    NoPath { start: (usize, usize), goal: (usize, usize) },

    #[error("blocked endpoint {0:?}")]
    BlockedEndpoint((usize, usize)),

    #[error("endpoint outside the grid: ({x:.3}, {y:.3})")]
    OutOfBounds { x: f64, y: f64 },

    #[error("empty plan")]
    EmptyPlan,

    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    DimensionMismatch { what: &'static str, expected: usize, actual: usize },

    #[error("stage index {0} out of range 1..=7")]
    StageOutOfRange(usize),

    #[error("step called after episode finished")]
    StepAfterDone,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, NavError>;
