use std::time::Duration;

use chrono::{DateTime, Utc};

/// Errors returned by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The solar ephemeris is only valid for 1950 through 2100.
    #[error("timestamp {0} is outside the supported range 1950-2100")]
    TimestampOutOfRange(DateTime<Utc>),

    #[error("invalid location: {0}")]
    InvalidLocation(String),

    /// A row of an input file could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Timestamps in an input file were duplicated or went backwards.
    #[error("line {line}: timestamp is not strictly after the previous row")]
    Ordering { line: usize },

    /// The sampling interval of an input file was not uniform.
    #[error("line {line}: sampling interval of {found_secs} s, expected {expected_secs} s")]
    Cadence {
        line: usize,
        expected_secs: i64,
        found_secs: i64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// Not enough data for the requested operation.
    #[error("insufficient data: {0}")]
    Range(String),

    /// Fitting produced a model whose polynomials have roots on or inside
    /// the unit circle, or the optimizer did not converge.
    #[error("unstable model: {0}")]
    UnstableModel(String),

    #[error("training exceeded the time budget of {0:?}")]
    TrainingTimeout(Duration),

    /// No reference pattern lies within the distance threshold.
    #[error("empty neighborhood: no reference pattern within distance {0}")]
    EmptyNeighborhood(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
