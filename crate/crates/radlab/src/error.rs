//! Crate error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension n = {0}, need n >= 2")]
    InvalidDimension(usize),

    #[error("cell budget exceeded: covering would need {needed} cells (budget {budget})")]
    ResourceLimit { needed: u64, budget: u64 },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("level {requested} too fine for grid: max admissible j is {max}")]
    LevelTooFine { requested: u32, max: i64 },

    #[error("parameter order violated: {0}")]
    ParameterOrder(String),

    #[error("input is not radial: orbit deviation {deviation:.3e} exceeds tolerance {tolerance:.1e}")]
    SymmetryViolation { deviation: f64, tolerance: f64 },

    #[error("insufficient profile range: {0}")]
    InsufficientRange(String),

    #[error("support check failed: {0}")]
    SupportCheck(String),

    #[error("index mismatch: {0}")]
    IndexMismatch(String),

    #[error("parameter regime not admissible: {0}")]
    Regime(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
