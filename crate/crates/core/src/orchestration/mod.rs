//! Scheduling patterns: an external controller, directors that delegate to
//! workers (on hold or from a pre-built pool) and a concurrent coordinator that
//! synchronizes participants at checkpoint barriers.

mod barrier;
mod controller;
mod director;
mod onhold;
mod pool;
mod worker;

pub use barrier::{CheckpointBarrier, CheckpointSchedule};
pub use controller::{ConservedTotal, Controller, FaultHook, RunConfig, WindowCheck};
pub use director::{Director, DirectorModel, Realization};
pub use onhold::{exclusivity_holds, Activity, ActivityLog, OnHold};
pub use pool::{wait, PoolFuture, WorkerPool, WorkerStatus};
pub use worker::Worker;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrchestrationError {
    #[error("worker {worker} failed: {cause}")]
    WorkerFailed { worker: usize, cause: String },
    #[error("worker pool is shut down")]
    PoolShutDown,
    #[error("checkpoint barrier poisoned by `{by}`")]
    BarrierPoisoned { by: String },
    #[error("no checkpoint at tick {0}")]
    NoSuchCheckpoint(u64),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("director stepped while {active} worker(s) were active")]
    ExclusivityViolated { active: usize },
    #[error("consistency check failed at tick {tick}: {reason}")]
    ConsistencyViolation { tick: u64, reason: String },
    #[error("no such worker {0}")]
    NoSuchWorker(usize),
    #[error("worker {0} is busy")]
    WorkerBusy(usize),
}
