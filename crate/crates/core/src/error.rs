//! Error types shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Failures while reading or validating a dataset.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid schema spec: {message}")]
    SchemaSpec { path: PathBuf, message: String },

    #[error("{path}: {message}")]
    Header { path: PathBuf, message: String },

    #[error("{path}: row {row}, column `{column}`: {message}")]
    Row {
        path: PathBuf,
        /// 1-based data row number (the header is row 0).
        row: usize,
        column: String,
        message: String,
    },

    #[error("{path}: row {row}: {message}")]
    Arity {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("invalid dataset `{name}`: {message}")]
    Validity { name: String, message: String },

    #[error("malformed canonical dataset: {0}")]
    Canonical(String),
}

/// Violated preconditions in the numeric and selection routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContractError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("{0}")]
    Violated(String),
}

/// Domain failures: the inputs are well-formed but no answer exists.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("query {query_id} has no unlike-labelled instance available")]
    NoUnlikeNeighbor { query_id: usize },

    #[error("query {query_id} has an empty candidate pool")]
    EmptyPool { query_id: usize },
}

/// Logistic regression fitting failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("training set is empty")]
    Empty,

    #[error("training set contains a single label")]
    SingleLabel,

    #[error("training rows have inconsistent length")]
    Ragged,

    #[error("loss became non-finite at iteration {iteration}")]
    NonFinite { iteration: usize },
}

/// Failures inside a semi-factual selection method.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MethodError {
    #[error(transparent)]
    Contract(#[from] ContractError),

    #[error(transparent)]
    Domain(#[from] DomainError),

    #[error("surrogate fit failed: {0}")]
    Surrogate(#[from] FitError),
}

/// Failures in the benchmark harness and report writer.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Data(#[from] DataError),

    #[error(transparent)]
    Contract(#[from] ContractError),

    #[error("invalid run config: {0}")]
    Config(String),

    #[error("output directory {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report serialization failed: {0}")]
    Serialize(String),
}
