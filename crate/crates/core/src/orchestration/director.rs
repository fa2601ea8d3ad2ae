use super::{wait, ActivityLog, OnHold, Worker, WorkerPool};
use crate::kernel::{Message, ObservationRecord, RunLog, Snapshot, Submodel};
use crate::Result;

/// The director's own part of a director-worker submodel: it splits a step
/// into tasks and folds the results back into its state.
pub trait DirectorModel: Send {
    type Task: Send + 'static;
    type Output: Send + 'static;

    fn id(&self) -> &str;
    fn step_ticks(&self) -> u64;
    fn initialize(&mut self, seed: u64) -> Result<()>;
    fn plan(&mut self, from_tick: u64, step_ticks: u64, inbox: &[Message]) -> Result<Vec<Self::Task>>;
    fn integrate(
        &mut self,
        from_tick: u64,
        step_ticks: u64,
        outputs: Vec<Self::Output>,
    ) -> Result<Vec<Message>>;
    fn snapshot(&self, tick: u64) -> Result<Snapshot>;
    fn restore(&mut self, snapshot: &Snapshot) -> Result<()>;
    fn observe(&self, tick: u64) -> ObservationRecord;
}

pub enum Realization<W: Worker> {
    OnHold(OnHold<W>),
    OnDemand(WorkerPool<W>),
}

impl<W: Worker> Realization<W> {
    fn run(&mut self, tasks: Vec<W::Task>) -> Result<Vec<W::Output>> {
        match self {
            Realization::OnHold(on_hold) => on_hold.delegate_all(tasks),
            Realization::OnDemand(pool) => {
                let futures = tasks
                    .into_iter()
                    .map(|t| pool.assign(t))
                    .collect::<Result<Vec<_>>>()?;
                futures.into_iter().map(wait).collect()
            }
        }
    }
}

/// A submodel that delegates the bulk of each step to workers.
pub struct Director<M, W>
where
    M: DirectorModel,
    W: Worker<Task = M::Task, Output = M::Output>,
{
    model: M,
    realization: Realization<W>,
    activity: ActivityLog,
}

impl<M, W> Director<M, W>
where
    M: DirectorModel,
    W: Worker<Task = M::Task, Output = M::Output>,
{
    pub fn new(model: M, realization: Realization<W>) -> Self {
        let activity = match &realization {
            Realization::OnHold(on_hold) => on_hold.activity().clone(),
            Realization::OnDemand(_) => ActivityLog::new(),
        };
        Self {
            model,
            realization,
            activity,
        }
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn realization(&self) -> &Realization<W> {
        &self.realization
    }

    pub fn activity(&self) -> &ActivityLog {
        &self.activity
    }
}

impl<M, W> Submodel for Director<M, W>
where
    M: DirectorModel,
    W: Worker<Task = M::Task, Output = M::Output>,
{
    fn id(&self) -> &str {
        self.model.id()
    }

    fn step_ticks(&self) -> u64 {
        self.model.step_ticks()
    }

    fn initialize(&mut self, seed: u64) -> Result<()> {
        self.model.initialize(seed)
    }

    fn step(
        &mut self,
        from_tick: u64,
        step_ticks: u64,
        inbox: &[Message],
        _log: &mut RunLog,
    ) -> Result<Vec<Message>> {
        self.activity.director_work()?;
        let tasks = self.model.plan(from_tick, step_ticks, inbox)?;
        let outputs = self.realization.run(tasks)?;
        self.activity.director_work()?;
        self.model.integrate(from_tick, step_ticks, outputs)
    }

    fn snapshot(&self, tick: u64) -> Result<Snapshot> {
        self.model.snapshot(tick)
    }

    fn restore(&mut self, snapshot: &Snapshot) -> Result<()> {
        self.model.restore(snapshot)
    }

    fn observe(&self, tick: u64) -> ObservationRecord {
        self.model.observe(tick)
    }
}
