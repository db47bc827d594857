//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("label column {column:?} not found in header")]
    MissingColumn { column: String },

    #[error("cell at row {row}, column {column:?} does not parse as a finite number: {value:?}")]
    UnparsableCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("non-finite value at row {row}, column {column:?}")]
    NonFinite { row: usize, column: String },

    #[error("dataset has no rows")]
    EmptyDataset,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("feature {name:?} required by the model is missing from the input")]
    FeatureMismatch { name: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("data is not normalized: |{value}| > 1 at row {row}, feature {column}")]
    Unnormalized {
        row: usize,
        column: usize,
        value: f64,
    },

    #[error("assignment is missing variable {name:?}")]
    MissingVariable { name: String },

    #[error("unknown synthetic shape {name:?} (expected square, corner, diamond, or castle)")]
    UnknownShape { name: String },

    #[error("invalid model JSON: {0}")]
    InvalidModel(String),
}
