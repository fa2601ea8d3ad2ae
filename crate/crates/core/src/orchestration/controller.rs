use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::thread;

use super::{CheckpointBarrier, CheckpointSchedule, OrchestrationError};
use crate::exchange::{SharedStore, StoreImage, StoreValue};
use crate::kernel::{
    digest64, restore_tree, snapshot_tree, Coupling, EventKind, LogEvent, Message, ModelNode,
    ObservationRecord, RunLog, SimClock, Snapshot, Submodel, Value,
};
use crate::runner::{ExecutorMode, Trajectory};
use crate::Result;

/// Identity of the controller in the run log.
const CONTROLLER: &str = "controller";

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub end_tick: u64,
    pub checkpoint_interval: u64,
    pub executor: ExecutorMode,
    pub out_dir: Option<PathBuf>,
    /// Re-executions of one window before a consistency failure is fatal.
    pub max_retries: u32,
}

impl RunConfig {
    pub fn new(seed: u64, end_tick: u64, checkpoint_interval: u64) -> Self {
        Self {
            seed,
            end_tick,
            checkpoint_interval,
            executor: ExecutorMode::Sequential,
            out_dir: None,
            max_retries: 3,
        }
    }

    pub fn with_executor(mut self, executor: ExecutorMode) -> Self {
        self.executor = executor;
        self
    }

    pub fn validate(&self) -> Result<(), OrchestrationError> {
        if self.checkpoint_interval == 0 {
            return Err(OrchestrationError::InvalidSchedule(
                "checkpoint interval must be positive".into(),
            ));
        }
        if !self.end_tick.is_multiple_of(self.checkpoint_interval) {
            return Err(OrchestrationError::InvalidSchedule(format!(
                "end tick {} is not a multiple of the checkpoint interval {}",
                self.end_tick, self.checkpoint_interval
            )));
        }
        Ok(())
    }
}

/// Consistency check run on the records of every checkpoint.
pub trait WindowCheck: Send {
    fn name(&self) -> &str;
    fn check(&self, tick: u64, records: &[ObservationRecord]) -> std::result::Result<(), String>;
}

/// The integer sum of `labels` over all records carrying them is constant.
pub struct ConservedTotal {
    labels: Vec<String>,
    total: i64,
}

impl ConservedTotal {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>, total: i64) -> Self {
        Self {
            labels: labels.into_iter().map(Into::into).collect(),
            total,
        }
    }
}

impl WindowCheck for ConservedTotal {
    fn name(&self) -> &str {
        "conservation"
    }

    fn check(&self, _tick: u64, records: &[ObservationRecord]) -> std::result::Result<(), String> {
        let labels: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        let sum: i64 = records.iter().filter_map(|r| r.int_sum(&labels)).sum();
        if sum == self.total {
            Ok(())
        } else {
            Err(format!("total {sum} differs from {}", self.total))
        }
    }
}

/// Test hook called with `(checkpoint_tick, attempt, records)` before the
/// consistency checks; it may tamper with the records.
pub type FaultHook = Box<dyn FnMut(u64, u32, &mut Vec<ObservationRecord>) + Send>;

struct Participant {
    node: ModelNode,
    inbox: Vec<Message>,
}

struct Checkpoint {
    snapshots: Vec<Vec<Snapshot>>,
    inboxes: Vec<Vec<Message>>,
    store: StoreImage,
    records: usize,
}

enum WindowOutcome {
    Committed,
    Inconsistent { check: String, reason: String },
}

/// Drives a model tree from tick 0 to the end tick.
///
/// The children of the root are the participants. They step independently
/// inside each checkpoint window; messages between them are routed at the
/// barrier that closes the window.
pub struct Controller {
    participants: Vec<Participant>,
    couplings: Vec<Coupling>,
    clock: SimClock,
    store: Arc<SharedStore>,
    config: RunConfig,
    schedule: CheckpointSchedule,
    log: RunLog,
    trajectory: Trajectory,
    checkpoints: BTreeMap<u64, Checkpoint>,
    checks: Vec<Box<dyn WindowCheck>>,
    fault_hook: Option<FaultHook>,
    started: bool,
}

impl Controller {
    pub fn new(tree: ModelNode, clock: SimClock, config: RunConfig) -> Result<Self> {
        config.validate()?;
        let (nodes, couplings) = tree.into_participants();
        let steps: Vec<(String, u64)> = nodes
            .iter()
            .map(|n| (n.id().to_owned(), n.step_ticks()))
            .collect();
        let schedule = CheckpointSchedule::new(config.checkpoint_interval, &steps)?;
        Ok(Self {
            participants: nodes
                .into_iter()
                .map(|node| Participant {
                    node,
                    inbox: Vec::new(),
                })
                .collect(),
            couplings,
            clock,
            store: Arc::new(SharedStore::new()),
            config,
            schedule,
            log: RunLog::new(),
            trajectory: Trajectory::default(),
            checkpoints: BTreeMap::new(),
            checks: Vec::new(),
            fault_hook: None,
            started: false,
        })
    }

    pub fn with_check(mut self, check: impl WindowCheck + 'static) -> Self {
        self.checks.push(Box::new(check));
        self
    }

    pub fn with_fault_hook(mut self, hook: FaultHook) -> Self {
        self.fault_hook = Some(hook);
        self
    }

    pub fn clock(&self) -> &SimClock {
        &self.clock
    }

    pub fn now(&self) -> u64 {
        self.clock.now()
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn schedule(&self) -> &CheckpointSchedule {
        &self.schedule
    }

    pub fn store(&self) -> &Arc<SharedStore> {
        &self.store
    }

    pub fn log(&self) -> &RunLog {
        &self.log
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn participant_ids(&self) -> Vec<String> {
        self.participants.iter().map(|p| p.node.id().to_owned()).collect()
    }

    pub fn checkpoint_ticks(&self) -> Vec<u64> {
        self.checkpoints.keys().copied().collect()
    }

    /// Digest over the current snapshot set of every participant.
    pub fn state_digest(&self) -> Result<u64> {
        let mut bytes = Vec::new();
        for p in &self.participants {
            for s in snapshot_tree(&p.node, self.clock.now())? {
                bytes.extend_from_slice(s.submodel_id.as_bytes());
                bytes.extend_from_slice(&s.digest.to_le_bytes());
            }
        }
        for inbox in self.participants.iter().map(|p| &p.inbox) {
            bytes.extend_from_slice(format!("{inbox:?}").as_bytes());
        }
        Ok(digest64(&bytes))
    }

    /// Initializes every participant and records tick 0.
    pub fn start(&mut self) -> Result<()> {
        if self.started {
            return Ok(());
        }
        for p in &mut self.participants {
            p.node.initialize(self.config.seed)?;
            for id in p.node.leaf_ids() {
                self.store.declare(&id, &id)?;
            }
        }
        self.started = true;
        let records = self.observe(self.clock.now());
        self.commit(records)?;
        Ok(())
    }

    pub fn run(&mut self) -> Result<Trajectory> {
        self.run_until(self.config.end_tick)?;
        Ok(self.trajectory.clone())
    }

    /// Runs whole windows until the clock reaches `tick`, a checkpoint.
    pub fn run_until(&mut self, tick: u64) -> Result<()> {
        self.start()?;
        if !self.schedule.is_checkpoint(tick) {
            return Err(OrchestrationError::InvalidSchedule(format!(
                "tick {tick} is not a checkpoint"
            ))
            .into());
        }
        while self.clock.now() < tick {
            self.run_window()?;
        }
        Ok(())
    }

    /// Restores the state saved at checkpoint `tick` and drops everything
    /// recorded after it.
    pub fn rollback_to(&mut self, tick: u64) -> Result<()> {
        let from = self.restore_checkpoint(tick)?;
        if from != tick {
            self.log.push(
                LogEvent::new(tick, EventKind::Rollback, CONTROLLER).field("from", from),
            );
        }
        Ok(())
    }

    /// Returns the tick the clock was at before the restore.
    fn restore_checkpoint(&mut self, tick: u64) -> Result<u64> {
        let Some(cp) = self.checkpoints.get(&tick) else {
            return Err(OrchestrationError::NoSuchCheckpoint(tick).into());
        };
        for (p, (snaps, inbox)) in self
            .participants
            .iter_mut()
            .zip(cp.snapshots.iter().zip(&cp.inboxes))
        {
            restore_tree(&mut p.node, snaps)?;
            p.inbox = inbox.clone();
        }
        self.store.restore(&cp.store);
        self.trajectory.truncate(cp.records);
        let from = self.clock.now();
        self.clock.rewind_to(tick);
        self.checkpoints.split_off(&(tick + 1));
        Ok(from)
    }

    fn run_window(&mut self) -> Result<()> {
        let start = self.clock.now();
        let mut attempt = 0;
        loop {
            match self.execute_window(start, attempt)? {
                WindowOutcome::Committed => return Ok(()),
                WindowOutcome::Inconsistent { check, reason } => {
                    let end = self.restore_checkpoint(start)?;
                    if attempt >= self.config.max_retries {
                        return Err(OrchestrationError::ConsistencyViolation { tick: end, reason }.into());
                    }
                    self.log.push(
                        LogEvent::new(start, EventKind::Rollback, CONTROLLER)
                            .field("from", end)
                            .field("check", &check)
                            .field("reexecute", attempt + 1),
                    );
                    attempt += 1;
                }
            }
        }
    }

    fn execute_window(&mut self, start: u64, attempt: u32) -> Result<WindowOutcome> {
        let end = self.schedule.next_after(start);
        let inboxes: Vec<Vec<Message>> = self
            .participants
            .iter_mut()
            .map(|p| std::mem::take(&mut p.inbox))
            .collect();
        let results = match self.config.executor {
            ExecutorMode::Parallel(units) if units > 1 && self.participants.len() > 1 => {
                run_parallel(&mut self.participants, &inboxes, start, end, units)
            }
            _ => self
                .participants
                .iter_mut()
                .zip(&inboxes)
                .map(|(p, inbox)| advance(&mut p.node, inbox, start, end))
                .collect(),
        };
        let mut outboxes = Vec::with_capacity(results.len());
        let mut failure = None;
        for (outcome, mut log) in results {
            self.log.append(&mut log);
            match outcome {
                Ok(out) => outboxes.push(out),
                Err(e) => {
                    failure.get_or_insert(e);
                    outboxes.push(Vec::new());
                }
            }
        }
        if let Some(e) = failure {
            return Err(e);
        }
        self.log.push(LogEvent::new(end, EventKind::Barrier, CONTROLLER));
        self.route(outboxes);
        self.clock.advance_to(end)?;

        let mut records = self.observe(end);
        if let Some(hook) = self.fault_hook.as_mut() {
            hook(end, attempt, &mut records);
        }
        for check in &self.checks {
            if let Err(reason) = check.check(end, &records) {
                return Ok(WindowOutcome::Inconsistent {
                    check: check.name().to_owned(),
                    reason,
                });
            }
        }
        self.commit(records)?;
        Ok(WindowOutcome::Committed)
    }

    fn route(&mut self, outboxes: Vec<Vec<Message>>) {
        for (src, out) in outboxes.into_iter().enumerate() {
            let producer = self.participants[src].node.id().to_owned();
            for msg in out {
                for c in self
                    .couplings
                    .iter()
                    .filter(|c| c.producer == producer && c.channel == msg.channel)
                {
                    if let Some(dst) = self.participants.iter_mut().find(|p| p.node.id() == c.consumer) {
                        dst.inbox.push(msg.clone());
                    }
                }
            }
        }
    }

    fn observe(&self, tick: u64) -> Vec<ObservationRecord> {
        let mut records: Vec<ObservationRecord> = self
            .participants
            .iter()
            .flat_map(|p| p.node.observe_leaves(tick))
            .collect();
        records.sort_by(|a, b| a.submodel_id.cmp(&b.submodel_id));
        records
    }

    /// Appends the records, publishes them and saves a checkpoint.
    fn commit(&mut self, records: Vec<ObservationRecord>) -> Result<()> {
        let tick = self.clock.now();
        for r in &records {
            for (label, value) in &r.named_values {
                let value = match *value {
                    Value::Int(v) => StoreValue::Int(v),
                    Value::Real(v) => StoreValue::Real(v),
                };
                self.store.put(&r.submodel_id, &r.submodel_id, label, value, tick)?;
            }
            self.store.put(
                &r.submodel_id,
                &r.submodel_id,
                "mode",
                StoreValue::Text(r.mode_tag.clone()),
                tick,
            )?;
        }
        self.trajectory.extend(records);
        let mut snapshots = Vec::with_capacity(self.participants.len());
        for p in &self.participants {
            snapshots.push(snapshot_tree(&p.node, tick)?);
        }
        self.checkpoints.insert(
            tick,
            Checkpoint {
                snapshots,
                inboxes: self.participants.iter().map(|p| p.inbox.clone()).collect(),
                store: self.store.image(),
                records: self.trajectory.len(),
            },
        );
        Ok(())
    }
}

type StepOutcome = (Result<Vec<Message>>, RunLog);

/// Steps one participant from `start` up to, and never past, `end`.
fn advance(node: &mut ModelNode, inbox: &[Message], start: u64, end: u64) -> StepOutcome {
    let mut log = RunLog::new();
    let step = node.step_ticks();
    let mut out = Vec::new();
    let mut t = start;
    while t < end {
        debug_assert!(t + step <= end);
        let delivered = if t == start { inbox } else { &[] };
        match node.step(t, step, delivered, &mut log) {
            Ok(msgs) => out.extend(msgs),
            Err(e) => return (Err(e), log),
        }
        t += step;
    }
    (Ok(out), log)
}

/// Spreads participants over `units` threads, participant `i` on unit
/// `i % units`, and meets them at a barrier at `end`.
fn run_parallel(
    participants: &mut [Participant],
    inboxes: &[Vec<Message>],
    start: u64,
    end: u64,
    units: usize,
) -> Vec<StepOutcome> {
    let units = units.min(participants.len());
    let mut buckets: Vec<Vec<(usize, &mut Participant)>> = (0..units).map(|_| Vec::new()).collect();
    for (i, p) in participants.iter_mut().enumerate() {
        buckets[i % units].push((i, p));
    }
    let barrier = CheckpointBarrier::new(units + 1);
    let mut results: Vec<(usize, StepOutcome)> = thread::scope(|s| {
        let handles: Vec<_> = buckets
            .into_iter()
            .map(|bucket| {
                let barrier = &barrier;
                s.spawn(move || {
                    let mut done = Vec::with_capacity(bucket.len());
                    for (i, p) in bucket {
                        let outcome = advance(&mut p.node, &inboxes[i], start, end);
                        if outcome.0.is_err() {
                            barrier.poison(p.node.id());
                        }
                        done.push((i, outcome));
                    }
                    // the coordinator reports the failing participant itself
                    let _ = barrier.wait();
                    done
                })
            })
            .collect();
        let _ = barrier.wait();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("execution unit panicked"))
            .collect()
    });
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().map(|(_, r)| r).collect()
}
