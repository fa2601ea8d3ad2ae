//! Single-assignment result slots handed between execution units.

use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use super::ExchangeError;

enum Slot<T> {
    Pending,
    Ready(T),
    Failed(String),
    Orphaned,
}

struct Shared<T> {
    slot: Mutex<Slot<T>>,
    ready: Condvar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FutureStatus {
    Pending,
    Ready,
    Failed,
}

/// Write side. Resolving or failing consumes it; dropping it while the slot is
/// still pending wakes readers with [`ExchangeError::OrphanedFuture`].
pub struct Promise<T> {
    shared: Arc<Shared<T>>,
}

/// Read side of a [`Promise`].
pub struct Future<T> {
    shared: Arc<Shared<T>>,
}

pub fn promise<T>() -> (Promise<T>, Future<T>) {
    let shared = Arc::new(Shared {
        slot: Mutex::new(Slot::Pending),
        ready: Condvar::new(),
    });
    (
        Promise {
            shared: shared.clone(),
        },
        Future { shared },
    )
}

impl<T> Promise<T> {
    pub fn resolve(self, value: T) {
        self.settle(Slot::Ready(value));
    }

    pub fn fail(self, error: impl std::fmt::Display) {
        self.settle(Slot::Failed(error.to_string()));
    }

    fn settle(&self, next: Slot<T>) {
        let mut slot = self.shared.slot.lock().unwrap_or_else(|p| p.into_inner());
        if matches!(*slot, Slot::Pending) {
            *slot = next;
            self.shared.ready.notify_all();
        }
    }
}

impl<T> Drop for Promise<T> {
    fn drop(&mut self) {
        self.settle(Slot::Orphaned);
    }
}

impl<T> Future<T> {
    pub fn ready(value: T) -> Self {
        let (p, f) = promise();
        p.resolve(value);
        f
    }

    pub fn status(&self) -> FutureStatus {
        match *self.shared.slot.lock().unwrap_or_else(|p| p.into_inner()) {
            Slot::Pending => FutureStatus::Pending,
            Slot::Ready(_) => FutureStatus::Ready,
            Slot::Failed(_) | Slot::Orphaned => FutureStatus::Failed,
        }
    }

    pub fn is_ready(&self) -> bool {
        self.status() == FutureStatus::Ready
    }

    /// Blocks until the producer settles the slot.
    pub fn get(self) -> Result<T, ExchangeError> {
        let slot = self.shared.slot.lock().unwrap_or_else(|p| p.into_inner());
        let mut slot = self
            .shared
            .ready
            .wait_while(slot, |s| matches!(s, Slot::Pending))
            .unwrap_or_else(|p| p.into_inner());
        take(&mut slot)
    }

    /// Like [`Future::get`] but gives the future back if `timeout` elapses first.
    pub fn get_timeout(self, timeout: Duration) -> Result<Result<T, ExchangeError>, Self> {
        let settled = {
            let slot = self.shared.slot.lock().unwrap_or_else(|p| p.into_inner());
            let (mut slot, res) = self
                .shared
                .ready
                .wait_timeout_while(slot, timeout, |s| matches!(s, Slot::Pending))
                .unwrap_or_else(|p| p.into_inner());
            if res.timed_out() {
                None
            } else {
                Some(take(&mut slot))
            }
        };
        settled.ok_or(self)
    }
}

fn take<T>(slot: &mut Slot<T>) -> Result<T, ExchangeError> {
    match std::mem::replace(slot, Slot::Orphaned) {
        Slot::Ready(v) => Ok(v),
        Slot::Failed(e) => {
            *slot = Slot::Failed(e.clone());
            Err(ExchangeError::FutureFailed(e))
        }
        Slot::Orphaned => Err(ExchangeError::OrphanedFuture),
        Slot::Pending => unreachable!("waited past pending"),
    }
}
