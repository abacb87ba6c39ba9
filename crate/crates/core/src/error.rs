use std::io;

use thiserror::Error;

/// Errors produced by the index, the statistics routines and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate vector: cannot normalize a zero-norm vector")]
    DegenerateVector,

    #[error("antipodal degenerate set: centroid is the zero vector")]
    AntipodalDegenerate,

    #[error("degenerate query: query coincides with the normalized centroid")]
    DegenerateQuery,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value at coordinate {0}")]
    NonFinite(usize),

    #[error("vector is not unit norm (norm = {0})")]
    NotUnitNorm(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("candidate {0} is already present in the queue")]
    DuplicateCandidate(u32),

    #[error("sampling budget of {budget} draws exhausted after accepting {accepted} planes")]
    SamplingBudgetExceeded { budget: u64, accepted: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed file at byte offset {offset} (record {record}): {message}")]
    Format {
        offset: u64,
        record: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
