use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the distribution types, measures, index and file readers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("histogram has zero total mass")]
    ZeroMass,
    #[error("negative value {value} at component {index}")]
    NegativeValue { index: usize, value: f64 },
    #[error("non-finite value at component {index}")]
    NonFinite { index: usize },
    #[error("distribution must have at least one component")]
    Empty,
    #[error("probabilities sum to {sum}, expected 1 within {tol}")]
    NotNormalized { sum: f64, tol: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("{labels} labels given for {counts} counts")]
    LabelCount { labels: usize, counts: usize },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("joint table row {row} has {found} columns, expected {expected}")]
    RaggedTable { row: usize, expected: usize, found: usize },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("index needs at least one item")]
    EmptyIndex,
    #[error("duplicate item id {0}")]
    DuplicateId(String),
    #[error("neighbor count {n} out of range 1..={len}")]
    NeighborCount { n: usize, len: usize },
    #[error("unsupported snapshot format version {0}")]
    SnapshotVersion(u32),
    #[error("corrupt snapshot: {0}")]
    Snapshot(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
