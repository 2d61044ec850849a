//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by table construction, test evaluation and generators.
///
/// Note that an incomputable X² statistic is *not* an error: it is a valid
/// outcome carried inside [`crate::stats::TestResult`]. Errors here signal
/// malformed inputs or violated preconditions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} observations vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("input must contain at least one observation")]
    EmptyInput,

    #[error("category code {code} out of range for cardinality {cardinality}")]
    CodeOutOfRange { code: usize, cardinality: usize },

    #[error("cardinality {got} is too small; at least {min} required")]
    CardinalityTooSmall { got: usize, min: usize },

    #[error("table has no observations")]
    EmptyTable,

    #[error("stratified table has no nonempty stratum")]
    AllStrataEmpty,

    #[error("negative value {0} where a non-negative one was required")]
    NegativeInput(f64),

    #[error("exact enumeration supports at most {limit} observations per stratum, got {got}")]
    InstanceTooLarge { got: usize, limit: usize },

    #[error("expected a 2x2 table, got {rows}x{cols}")]
    NotTwoByTwo { rows: usize, cols: usize },

    #[error("column index {index} out of range for matrix with {columns} columns")]
    ColumnOutOfRange { index: usize, columns: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
