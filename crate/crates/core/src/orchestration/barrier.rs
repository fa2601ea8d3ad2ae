use std::sync::{Condvar, Mutex};

use super::OrchestrationError;

/// Global synchronization points, every `interval_ticks`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckpointSchedule {
    interval_ticks: u64,
}

impl CheckpointSchedule {
    /// `steps` are the step lengths of every participant; each must divide the
    /// interval.
    pub fn new(interval_ticks: u64, steps: &[(String, u64)]) -> Result<Self, OrchestrationError> {
        if interval_ticks == 0 {
            return Err(OrchestrationError::InvalidSchedule(
                "checkpoint interval must be positive".into(),
            ));
        }
        for (id, step) in steps {
            if *step == 0 || !interval_ticks.is_multiple_of(*step) {
                return Err(OrchestrationError::InvalidSchedule(format!(
                    "interval {interval_ticks} is not a multiple of `{id}` step {step}"
                )));
            }
        }
        Ok(Self { interval_ticks })
    }

    pub fn interval_ticks(&self) -> u64 {
        self.interval_ticks
    }

    pub fn is_checkpoint(&self, tick: u64) -> bool {
        tick.is_multiple_of(self.interval_ticks)
    }

    /// First checkpoint strictly after `tick`.
    pub fn next_after(&self, tick: u64) -> u64 {
        (tick / self.interval_ticks + 1) * self.interval_ticks
    }
}

#[derive(Debug)]
struct BarrierState {
    arrived: usize,
    generation: u64,
    poisoned: Option<String>,
}

/// Reusable barrier that any party can poison.
///
/// A poisoned barrier releases every waiter with `BarrierPoisoned`, and stays
/// poisoned.
#[derive(Debug)]
pub struct CheckpointBarrier {
    parties: usize,
    state: Mutex<BarrierState>,
    cv: Condvar,
}

impl CheckpointBarrier {
    pub fn new(parties: usize) -> Self {
        Self {
            parties: parties.max(1),
            state: Mutex::new(BarrierState {
                arrived: 0,
                generation: 0,
                poisoned: None,
            }),
            cv: Condvar::new(),
        }
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn generation(&self) -> u64 {
        self.state.lock().unwrap().generation
    }

    /// Waits until every party has arrived.
    pub fn wait(&self) -> Result<(), OrchestrationError> {
        let mut st = self.state.lock().unwrap();
        if let Some(by) = &st.poisoned {
            return Err(OrchestrationError::BarrierPoisoned { by: by.clone() });
        }
        let generation = st.generation;
        st.arrived += 1;
        if st.arrived == self.parties {
            st.arrived = 0;
            st.generation += 1;
            self.cv.notify_all();
            return Ok(());
        }
        while st.generation == generation && st.poisoned.is_none() {
            st = self.cv.wait(st).unwrap();
        }
        match &st.poisoned {
            Some(by) if st.generation == generation => {
                Err(OrchestrationError::BarrierPoisoned { by: by.clone() })
            }
            _ => Ok(()),
        }
    }

    /// Marks the barrier failed on behalf of `by` without arriving.
    pub fn poison(&self, by: &str) {
        let mut st = self.state.lock().unwrap();
        if st.poisoned.is_none() {
            st.poisoned = Some(by.to_owned());
        }
        self.cv.notify_all();
    }

    pub fn is_poisoned(&self) -> bool {
        self.state.lock().unwrap().poisoned.is_some()
    }
}
