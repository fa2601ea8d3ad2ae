//! Information exchange between submodels: futures, temporary-file pipes, a
//! shared versioned store and conservation-exact rounding.

mod apportion;
mod future;
mod pipe;
mod store;
mod tally;

pub use apportion::apportion;
pub use future::{promise, Future, FutureStatus, Promise};
pub use pipe::{
    read_all, FieldKind, FieldValue, FilePipe, PipeDir, PipeReader, PipeRecord, PipeSchema,
    PipeWriter,
};
pub use store::{SharedStore, StoreImage, StoreValue, Versioned};
pub use tally::{ConservedTally, MASS_TOLERANCE};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExchangeError {
    #[error("future producer terminated without resolving")]
    OrphanedFuture,
    #[error("future failed: {0}")]
    FutureFailed(String),
    #[error("record violates pipe schema `{schema}`: {reason}")]
    SchemaViolation { schema: String, reason: String },
    #[error("pipe i/o failure on {path}: {reason}")]
    IoFailure { path: String, reason: String },
    #[error("`{writer}` does not own namespace `{namespace}` (owner `{owner}`)")]
    NotOwner {
        namespace: String,
        writer: String,
        owner: String,
    },
    #[error("namespace `{0}` was never declared")]
    UnknownNamespace(String),
    #[error("no entry `{namespace}/{key}`")]
    KeyAbsent { namespace: String, key: String },
    #[error("weights are all zero but {total} units must be apportioned")]
    DegenerateWeights { total: u64 },
    #[error("weight {index} is negative or not finite")]
    InvalidWeight { index: usize },
    #[error("continuous delta sums to {sum}, mass must move between labels only")]
    MassLeak { sum: f64 },
    #[error("transfer would drive `{label}` below zero")]
    NegativeCount { label: String },
    #[error("expected {expected} entries, got {found}")]
    LengthMismatch { expected: usize, found: usize },
}
