//! Error type shared across the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while loading data, building features,
/// fitting, updating, or (de)serializing state.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header in {path}: {detail}")]
    MalformedHeader { path: PathBuf, detail: String },

    #[error("unknown dtype code {code} in {path}")]
    UnknownDtype { path: PathBuf, code: u8 },

    #[error("parse error in {path}: {detail}")]
    ParseError { path: PathBuf, detail: String },

    #[error("row-count mismatch: feature file has {features} rows, label file has {labels}")]
    RowCountMismatch { features: usize, labels: usize },

    #[error("non-finite value in {what} at row {row}, column {col}")]
    NonFinite {
        what: String,
        row: usize,
        col: usize,
    },

    #[error("dimension mismatch in {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        actual: usize,
    },

    #[error("label {label} is not in the class set")]
    LabelOutsideClassSet { label: u32 },

    #[error("too few classes: {classes} available, {needed} needed")]
    TooFewClasses { classes: usize, needed: usize },

    #[error("class {class} has no samples after filtering")]
    EmptyClass { class: u32 },

    #[error("strict-even split impossible: {remaining} classes over {phases} phases")]
    UnevenSplit { remaining: usize, phases: usize },

    #[error("class {class} appears in phase {first} and phase {second}")]
    OverlappingClasses {
        class: u32,
        first: usize,
        second: usize,
    },

    #[error("class {class} is already registered")]
    DuplicateClass { class: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("factorization failed: matrix is not positive definite (condition estimate {condition_estimate:.3e})")]
    Factorization { condition_estimate: f64 },

    #[error("class sets differ: {detail}")]
    ClassSetMismatch { detail: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("state format version {found} unsupported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt state payload: {0}")]
    CorruptState(String),

    #[error("checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
}

impl Error {
    /// True for failures of numerical routines (as opposed to bad inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Factorization { .. })
    }
}
