//! Crate-wide error type.

use thiserror::Error;

/// Errors shared by the simulation and analysis modules.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or configuration value is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A normalization table was queried outside the horizon it was built for.
    #[error("time {t} is outside the table horizon [1, {horizon}]")]
    OutOfHorizon { t: u64, horizon: u64 },

    /// The inverse of the cumulative sum could not reach the requested target
    /// within the search bound: either the sum is bounded above, or the
    /// preimage is astronomically far out.
    #[error("cumulative target {target} not reached by step {searched}")]
    UnreachableTarget { target: f64, searched: u64 },

    /// A vertex id was requested from a trajectory that does not track it.
    #[error("vertex {0} is not tracked in this trajectory")]
    UntrackedVertex(u32),

    /// A binary snapshot failed structural validation.
    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A report or config could not be serialized.
    #[error(transparent)]
    Serialization(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
