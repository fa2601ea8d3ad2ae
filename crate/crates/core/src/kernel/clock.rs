use num_rational::Ratio;

use super::KernelError;
use crate::format::format_ratio;

/// Global simulation time as an integer count of a fixed rational quantum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimClock {
    now_ticks: u64,
    quantum_seconds: Ratio<u64>,
}

impl SimClock {
    pub fn new(quantum_seconds: Ratio<u64>) -> Result<Self, KernelError> {
        if *quantum_seconds.numer() == 0 {
            return Err(KernelError::ZeroQuantum);
        }
        Ok(Self {
            now_ticks: 0,
            quantum_seconds,
        })
    }

    pub fn now(&self) -> u64 {
        self.now_ticks
    }

    pub fn quantum(&self) -> Ratio<u64> {
        self.quantum_seconds
    }

    /// Model seconds spanned by `ticks`.
    pub fn seconds(&self, ticks: u64) -> Ratio<u64> {
        self.quantum_seconds * ticks
    }

    pub fn advance_to(&mut self, tick: u64) -> Result<(), KernelError> {
        if tick < self.now_ticks {
            return Err(KernelError::ClockRegression {
                now: self.now_ticks,
                requested: tick,
            });
        }
        self.now_ticks = tick;
        Ok(())
    }

    /// Moves the clock backwards. Only rollback may call this.
    pub fn rewind_to(&mut self, tick: u64) {
        self.now_ticks = tick;
    }

    pub fn ticks_for(&self, local_seconds: Ratio<u64>) -> Result<u64, KernelError> {
        ticks_for(local_seconds, self)
    }
}

/// Translates a submodel's local step into global ticks.
pub fn ticks_for(local_seconds: Ratio<u64>, clock: &SimClock) -> Result<u64, KernelError> {
    let ticks = local_seconds / clock.quantum_seconds;
    if !ticks.is_integer() || *ticks.numer() == 0 {
        return Err(KernelError::NonCommensurableStep {
            seconds: format_ratio(local_seconds),
            quantum: format_ratio(clock.quantum_seconds),
        });
    }
    Ok(ticks.to_integer())
}

/// A submodel's step expressed in base quanta.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalStep {
    pub submodel_id: String,
    pub step_ticks: u64,
}

impl LocalStep {
    pub fn new(submodel_id: impl Into<String>, step_ticks: u64) -> Result<Self, KernelError> {
        let submodel_id = submodel_id.into();
        if step_ticks == 0 {
            return Err(KernelError::ZeroStep(submodel_id));
        }
        Ok(Self {
            submodel_id,
            step_ticks,
        })
    }

    pub fn is_due(&self, tick: u64) -> bool {
        tick.is_multiple_of(self.step_ticks)
    }
}
