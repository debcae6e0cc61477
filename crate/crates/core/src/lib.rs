//! Semi-factual ("even if") explanations for tabular binary classification,
//! and a leave-one-out harness that benchmarks the selection methods.
//!
//! The crate is organised bottom-up:
//!
//! - [`data`]: CSV ingestion against a declarative schema, validation and
//!   min-max normalization.
//! - [`geometry`]: heterogeneous distance, neighbour ranking, nearest unlike
//!   neighbours and class Mahalanobis distance.
//! - [`surrogate`]: logistic regression used as a local proxy model.
//! - [`methods`]: Sim-Miss, Global-Sim, Attr-Sim, Local-Region and MDN.
//! - [`metrics`]: the six per-pair evaluation measures.
//! - [`harness`]: leave-one-out runs, summaries, mean ranks and reports.

pub mod cli;
pub mod data;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod methods;
pub mod metrics;
pub mod surrogate;

pub use data::{
    load_dataset, normalize, Dataset, FeatureKind, FeatureSchema, Instance, SchemaSpec,
};
pub use error::{ContractError, DataError, DomainError, FitError, HarnessError, MethodError};
pub use methods::{CandidatePool, Method, SemiFactualResult};
pub use metrics::{Metric, MetricsRecord, SparsityBin};
