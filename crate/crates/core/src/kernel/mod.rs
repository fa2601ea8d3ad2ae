//! Time, the uniform submodel interface, snapshots and the composite model tree.

mod clock;
mod log;
mod snapshot;
mod submodel;
mod tree;

pub use clock::{ticks_for, LocalStep, SimClock};
pub use log::{EventKind, LogEvent, LogLevel, RunLog};
pub use snapshot::{digest64, Snapshot, SNAPSHOT_FORMAT};
pub use submodel::{Message, ObservationRecord, Submodel, Value};
pub use tree::{restore_tree, snapshot_tree, Composite, Coupling, ModelNode};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("local step of {seconds} s is not an integer multiple of the {quantum} s quantum")]
    NonCommensurableStep { seconds: String, quantum: String },
    #[error("tick quantum must be positive")]
    ZeroQuantum,
    #[error("submodel `{0}` has a zero-length step")]
    ZeroStep(String),
    #[error("child `{child}` step {child_step} does not divide `{parent}` step {parent_step}")]
    ScheduleMismatch {
        parent: String,
        child: String,
        parent_step: u64,
        child_step: u64,
    },
    #[error("identifier `{0}` appears more than once in the model tree")]
    DuplicateId(String),
    #[error("coupling consumer `{0}` is not a child of the composite")]
    UnknownCouplingEndpoint(String),
    #[error("snapshot set is missing node `{0}`")]
    SnapshotSetIncomplete(String),
    #[error("snapshot for `{0}` does not belong to this tree")]
    UnexpectedSnapshot(String),
    #[error("snapshot for `{id}` is at tick {found}, expected {expected}")]
    TickMismatch { id: String, expected: u64, found: u64 },
    #[error("snapshot belongs to `{found}`, not `{expected}`")]
    SnapshotIdMismatch { expected: String, found: String },
    #[error("unsupported snapshot format version {0}")]
    SnapshotFormat(u8),
    #[error("snapshot codec: {0}")]
    Codec(String),
    #[error("clock cannot move from tick {now} back to {requested} outside a rollback")]
    ClockRegression { now: u64, requested: u64 },
}
