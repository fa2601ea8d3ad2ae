use std::collections::VecDeque;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc::{self, Sender};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};

use super::{OrchestrationError, Worker};
use crate::exchange::{promise, ExchangeError, Future, Promise};
use crate::Result;

/// Result of a pool task; a failure carries the worker id.
pub type PoolFuture<O> = Future<std::result::Result<O, OrchestrationError>>;

/// Blocks on a pool future and flattens its two failure layers.
pub fn wait<O>(future: PoolFuture<O>) -> Result<O> {
    match future.get() {
        Ok(Ok(value)) => Ok(value),
        Ok(Err(e)) => Err(e.into()),
        Err(ExchangeError::OrphanedFuture) => Err(OrchestrationError::PoolShutDown.into()),
        Err(e) => Err(e.into()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorkerStatus {
    Idle,
    Assigned(u64),
    Suspended,
}

struct Job<T, O> {
    id: u64,
    task: T,
    promise: Promise<std::result::Result<O, OrchestrationError>>,
}

struct State<T, O> {
    status: Vec<WorkerStatus>,
    queue: VecDeque<Job<T, O>>,
    senders: Vec<Sender<Job<T, O>>>,
    next_job: u64,
    shut_down: bool,
}

impl<T, O> State<T, O> {
    /// Hands queued jobs to the lowest-index idle workers, in FIFO order.
    fn dispatch(&mut self) {
        while !self.queue.is_empty() {
            let Some(w) = self.status.iter().position(|s| *s == WorkerStatus::Idle) else {
                break;
            };
            let job = self.queue.pop_front().unwrap();
            self.status[w] = WorkerStatus::Assigned(job.id);
            // a closed channel means shutdown; the job's promise then orphans
            let _ = self.senders[w].send(job);
        }
    }
}

/// Worker-on-demand realization: every worker is built when the pool is
/// created and reused for the lifetime of the pool.
pub struct WorkerPool<W: Worker> {
    state: Arc<Mutex<State<W::Task, W::Output>>>,
    constructions: Arc<AtomicUsize>,
    handles: Vec<JoinHandle<()>>,
}

impl<W: Worker> WorkerPool<W> {
    pub fn new(capacity: usize, factory: impl Fn(usize) -> W) -> Result<Self> {
        if capacity == 0 {
            return Err(OrchestrationError::InvalidSchedule("pool capacity must be positive".into()).into());
        }
        let constructions = Arc::new(AtomicUsize::new(0));
        let mut senders = Vec::with_capacity(capacity);
        let mut receivers = Vec::with_capacity(capacity);
        for _ in 0..capacity {
            let (tx, rx) = mpsc::channel::<Job<W::Task, W::Output>>();
            senders.push(tx);
            receivers.push(rx);
        }
        let state = Arc::new(Mutex::new(State {
            status: vec![WorkerStatus::Idle; capacity],
            queue: VecDeque::new(),
            senders,
            next_job: 0,
            shut_down: false,
        }));
        let mut handles = Vec::with_capacity(capacity);
        for (index, rx) in receivers.into_iter().enumerate() {
            let mut worker = factory(index);
            constructions.fetch_add(1, Ordering::SeqCst);
            let state = Arc::clone(&state);
            handles.push(thread::spawn(move || {
                while let Ok(job) = rx.recv() {
                    let outcome = catch_unwind(AssertUnwindSafe(|| worker.run(job.task)));
                    let result = match outcome {
                        Ok(Ok(out)) => Ok(out),
                        Ok(Err(e)) => Err(OrchestrationError::WorkerFailed {
                            worker: index,
                            cause: e.to_string(),
                        }),
                        Err(_) => Err(OrchestrationError::WorkerFailed {
                            worker: index,
                            cause: "panicked".into(),
                        }),
                    };
                    {
                        let mut st = state.lock().unwrap();
                        if st.status[index] == WorkerStatus::Assigned(job.id) {
                            st.status[index] = WorkerStatus::Idle;
                        }
                        st.dispatch();
                    }
                    job.promise.resolve(result);
                }
            }));
        }
        Ok(Self {
            state,
            constructions,
            handles,
        })
    }

    pub fn capacity(&self) -> usize {
        self.state.lock().unwrap().status.len()
    }

    /// Workers built so far; equals the capacity for the pool's whole life.
    pub fn constructions(&self) -> usize {
        self.constructions.load(Ordering::SeqCst)
    }

    pub fn statuses(&self) -> Vec<WorkerStatus> {
        self.state.lock().unwrap().status.clone()
    }

    pub fn queued(&self) -> usize {
        self.state.lock().unwrap().queue.len()
    }

    /// Queues `task` and hands it to the lowest-index idle worker, if any.
    pub fn assign(&self, task: W::Task) -> Result<PoolFuture<W::Output>> {
        let mut st = self.state.lock().unwrap();
        if st.shut_down {
            return Err(OrchestrationError::PoolShutDown.into());
        }
        let (promise, future) = promise();
        let id = st.next_job;
        st.next_job += 1;
        st.queue.push_back(Job { id, task, promise });
        st.dispatch();
        Ok(future)
    }

    /// Takes an idle worker out of rotation.
    pub fn suspend(&self, worker: usize) -> Result<()> {
        let mut st = self.state.lock().unwrap();
        match st.status.get(worker) {
            None => Err(OrchestrationError::NoSuchWorker(worker).into()),
            Some(WorkerStatus::Assigned(_)) => Err(OrchestrationError::WorkerBusy(worker).into()),
            Some(_) => {
                st.status[worker] = WorkerStatus::Suspended;
                Ok(())
            }
        }
    }

    pub fn resume(&self, worker: usize) -> Result<()> {
        let mut st = self.state.lock().unwrap();
        match st.status.get(worker) {
            None => Err(OrchestrationError::NoSuchWorker(worker).into()),
            Some(WorkerStatus::Suspended) => {
                st.status[worker] = WorkerStatus::Idle;
                st.dispatch();
                Ok(())
            }
            Some(_) => Ok(()),
        }
    }

    /// Stops accepting tasks, drops queued ones and joins the workers after
    /// their current task.
    pub fn shutdown(&mut self) {
        {
            let mut st = self.state.lock().unwrap();
            st.shut_down = true;
            st.queue.clear();
            st.senders.clear();
        }
        for h in self.handles.drain(..) {
            let _ = h.join();
        }
    }
}

impl<W: Worker> Drop for WorkerPool<W> {
    fn drop(&mut self) {
        self.shutdown();
    }
}
