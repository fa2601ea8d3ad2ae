use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use super::{OrchestrationError, Worker};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activity {
    DirectorWork,
    WorkerStart(usize),
    WorkerEnd(usize),
}

/// Ordered record of director and worker activity.
#[derive(Clone, Debug, Default)]
pub struct ActivityLog {
    events: Arc<Mutex<Vec<Activity>>>,
    active: Arc<AtomicUsize>,
}

impl ActivityLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> Vec<Activity> {
        self.events.lock().unwrap().clone()
    }

    pub fn active_workers(&self) -> usize {
        self.active.load(Ordering::SeqCst)
    }

    /// Records director work; fails if any worker is active.
    pub fn director_work(&self) -> Result<(), OrchestrationError> {
        let mut events = self.events.lock().unwrap();
        let active = self.active.load(Ordering::SeqCst);
        if active > 0 {
            return Err(OrchestrationError::ExclusivityViolated { active });
        }
        events.push(Activity::DirectorWork);
        Ok(())
    }

    fn worker_start(&self, id: usize) {
        let mut events = self.events.lock().unwrap();
        self.active.fetch_add(1, Ordering::SeqCst);
        events.push(Activity::WorkerStart(id));
    }

    fn worker_end(&self, id: usize) {
        let mut events = self.events.lock().unwrap();
        self.active.fetch_sub(1, Ordering::SeqCst);
        events.push(Activity::WorkerEnd(id));
    }
}

/// True when no director work is recorded while a worker is active.
pub fn exclusivity_holds(events: &[Activity]) -> bool {
    let mut active = 0usize;
    for e in events {
        match e {
            Activity::WorkerStart(_) => active += 1,
            Activity::WorkerEnd(_) => active = active.saturating_sub(1),
            Activity::DirectorWork if active > 0 => return false,
            Activity::DirectorWork => {}
        }
    }
    true
}

type Factory<W> = Box<dyn Fn(usize) -> W + Send>;

/// Director-on-hold realization: a fresh worker per task, destroyed after it.
pub struct OnHold<W: Worker> {
    factory: Factory<W>,
    constructed: usize,
    destroyed: usize,
    activity: ActivityLog,
}

impl<W: Worker> OnHold<W> {
    pub fn new(factory: impl Fn(usize) -> W + Send + 'static) -> Self {
        Self {
            factory: Box::new(factory),
            constructed: 0,
            destroyed: 0,
            activity: ActivityLog::new(),
        }
    }

    pub fn constructed(&self) -> usize {
        self.constructed
    }

    pub fn destroyed(&self) -> usize {
        self.destroyed
    }

    pub fn activity(&self) -> &ActivityLog {
        &self.activity
    }

    /// Runs one task on a fresh worker.
    pub fn delegate(&mut self, task: W::Task) -> Result<W::Output> {
        self.delegate_all(vec![task]).map(|mut out| out.remove(0))
    }

    /// Runs each task on its own fresh worker, concurrently. The caller is
    /// suspended until every worker has finished and been destroyed.
    pub fn delegate_all(&mut self, tasks: Vec<W::Task>) -> Result<Vec<W::Output>> {
        let first = self.constructed;
        let workers: Vec<(usize, W)> = (0..tasks.len())
            .map(|k| {
                let id = first + k;
                self.constructed += 1;
                (id, (self.factory)(id))
            })
            .collect();
        let activity = &self.activity;
        let outcomes: Vec<(usize, Result<W::Output>)> = thread::scope(|s| {
            let handles: Vec<_> = workers
                .into_iter()
                .zip(tasks)
                .map(|((id, mut worker), task)| {
                    activity.worker_start(id);
                    s.spawn(move || {
                        let out = worker.run(task);
                        drop(worker);
                        activity.worker_end(id);
                        (id, out)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker thread panicked"))
                .collect()
        });
        self.destroyed += outcomes.len();
        outcomes
            .into_iter()
            .map(|(id, out)| {
                out.map_err(|e| {
                    OrchestrationError::WorkerFailed {
                        worker: id,
                        cause: e.to_string(),
                    }
                    .into()
                })
            })
            .collect()
    }
}
