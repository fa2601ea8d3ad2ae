//! `y' = -rate * y`, whose exact solution makes it the solver oracle.

use serde::{Deserialize, Serialize};

use super::{rk4_step, ModelError};
use crate::kernel::{Message, ObservationRecord, RunLog, Snapshot, Submodel, Value};
use crate::{Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DecayState<T> {
    pub y: T,
    pub rate: T,
}

pub fn decay_step<T: Scalar>(state: DecayState<T>, h: T) -> Result<DecayState<T>, ModelError> {
    let rate = state.rate;
    let y = rk4_step(|y: &[T]| vec![-rate * y[0]], &[state.y], h)?;
    Ok(DecayState { y: y[0], rate })
}

pub struct DecayModel<T: Scalar> {
    id: String,
    step_ticks: u64,
    h: T,
    initial: DecayState<T>,
    state: DecayState<T>,
}

impl<T: Scalar> DecayModel<T> {
    pub fn new(id: impl Into<String>, step_ticks: u64, h: T, y0: T, rate: T) -> Self {
        let initial = DecayState { y: y0, rate };
        Self {
            id: id.into(),
            step_ticks,
            h,
            initial,
            state: initial,
        }
    }

    pub fn state(&self) -> DecayState<T> {
        self.state
    }
}

impl<T: Scalar> Submodel for DecayModel<T> {
    fn id(&self) -> &str {
        &self.id
    }

    fn step_ticks(&self) -> u64 {
        self.step_ticks
    }

    fn initialize(&mut self, _seed: u64) -> Result<()> {
        if !self.initial.rate.is_finite() || self.initial.rate < T::zero() {
            return Err(ModelError::InvalidParams("decay rate must be non-negative".into()).into());
        }
        self.state = self.initial;
        Ok(())
    }

    fn step(
        &mut self,
        _from_tick: u64,
        step_ticks: u64,
        _inbox: &[Message],
        _log: &mut RunLog,
    ) -> Result<Vec<Message>> {
        for _ in 0..step_ticks / self.step_ticks {
            self.state = decay_step(self.state, self.h)?;
        }
        Ok(Vec::new())
    }

    fn snapshot(&self, tick: u64) -> Result<Snapshot> {
        Ok(Snapshot::encode(&self.id, tick, &self.state)?)
    }

    fn restore(&mut self, snapshot: &Snapshot) -> Result<()> {
        self.state = snapshot.decode(&self.id)?;
        Ok(())
    }

    fn observe(&self, tick: u64) -> ObservationRecord {
        ObservationRecord::new(tick, &self.id, "ode").with("y", Value::Real(self.state.y.as_f64()))
    }
}
