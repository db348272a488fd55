//! Error type shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("time step rejected: CFL number {cfl:.3} exceeds 0.5")]
    CflViolation { cfl: f64 },

    #[error("data covers [{have_start}, {have_end}] but [{need_start}, {need_end}] is required")]
    InsufficientData {
        need_start: f64,
        need_end: f64,
        have_start: f64,
        have_end: f64,
    },

    #[error("condition {name} failed: lhs {lhs:.6e} vs rhs {rhs:.6e}")]
    ConditionFailed { name: String, lhs: f64, rhs: f64 },

    #[error(
        "weighted data energy over window [{window_start}, {window_end}] is degenerate \
         (n0 {n0:?}, cutoff {cutoff}); the inverse problem has no unique solution here"
    )]
    DegenerateData {
        window_start: f64,
        window_end: f64,
        n0: Option<f64>,
        cutoff: u32,
    },

    #[error("trajectory container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
