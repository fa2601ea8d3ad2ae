//! Continuous SIR dynamics:
//! `s' = -beta*s*i/N`, `i' = beta*s*i/N - gamma*i`, `r' = gamma*i`.

use serde::{Deserialize, Serialize};

use super::{rk4_step, ModelError};
use crate::kernel::{Message, ObservationRecord, RunLog, Snapshot, Submodel, Value};
use crate::{Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SirParams<T> {
    /// Transmission rate per unit time.
    pub beta: T,
    /// Recovery rate per unit time.
    pub gamma: T,
    pub n_total: u64,
}

impl<T: Scalar> SirParams<T> {
    /// Rates must be finite and non-negative; the population must be non-empty.
    pub fn new(beta: T, gamma: T, n_total: u64) -> Result<Self, ModelError> {
        for (name, v) in [("beta", beta), ("gamma", gamma)] {
            if !v.is_finite() || v < T::zero() {
                return Err(ModelError::InvalidParams(format!(
                    "{name} must be finite and non-negative"
                )));
            }
        }
        if n_total == 0 {
            return Err(ModelError::InvalidParams("n_total must be positive".into()));
        }
        Ok(Self {
            beta,
            gamma,
            n_total,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EbmState<T> {
    pub s: T,
    pub i: T,
    pub r: T,
}

impl<T: Scalar> EbmState<T> {
    pub fn new(s: T, i: T, r: T) -> Self {
        Self { s, i, r }
    }

    pub fn total(&self) -> T {
        self.s + self.i + self.r
    }

    fn to_vec(self) -> [T; 3] {
        [self.s, self.i, self.r]
    }

    fn from_slice(y: &[T]) -> Self {
        Self::new(y[0], y[1], y[2])
    }
}

/// RK4 step of the standard SIR field.
pub fn ebm_sir_step<T: Scalar>(
    state: EbmState<T>,
    params: &SirParams<T>,
    h: T,
) -> Result<EbmState<T>, ModelError> {
    let n = T::from_count(params.n_total);
    let beta = params.beta;
    ebm_sir_step_with(state, params, h, |y| beta * y.i / n)
}

/// RK4 step of the SIR field with the per-capita infection rate supplied by
/// `force_of_infection`, evaluated at every stage.
pub fn ebm_sir_step_with<T, F>(
    state: EbmState<T>,
    params: &SirParams<T>,
    h: T,
    force_of_infection: F,
) -> Result<EbmState<T>, ModelError>
where
    T: Scalar,
    F: Fn(&EbmState<T>) -> T,
{
    let gamma = params.gamma;
    let field = |y: &[T]| {
        let st = EbmState::from_slice(y);
        let infections = force_of_infection(&st) * st.s;
        let recoveries = gamma * st.i;
        vec![-infections, infections - recoveries, recoveries]
    };
    rk4_step(field, &state.to_vec(), h).map(|y| EbmState::from_slice(&y))
}

/// Stand-alone continuous SIR leaf.
pub struct EbmModel<T: Scalar> {
    id: String,
    step_ticks: u64,
    h: T,
    params: SirParams<T>,
    initial: EbmState<T>,
    state: EbmState<T>,
}

impl<T: Scalar> EbmModel<T> {
    /// `h` is the model-time length of one step of `step_ticks` quanta.
    pub fn new(
        id: impl Into<String>,
        step_ticks: u64,
        h: T,
        params: SirParams<T>,
        i0: u64,
    ) -> Self {
        let i = T::from_count(i0.min(params.n_total));
        let initial = EbmState::new(T::from_count(params.n_total) - i, i, T::zero());
        Self {
            id: id.into(),
            step_ticks,
            h,
            params,
            initial,
            state: initial,
        }
    }

    pub fn state(&self) -> EbmState<T> {
        self.state
    }
}

impl<T: Scalar> Submodel for EbmModel<T> {
    fn id(&self) -> &str {
        &self.id
    }

    fn step_ticks(&self) -> u64 {
        self.step_ticks
    }

    fn initialize(&mut self, _seed: u64) -> Result<()> {
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
            self.state = ebm_sir_step(self.state, &self.params, self.h)?;
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
        ObservationRecord::new(tick, &self.id, "ebm")
            .with("S", Value::Real(self.state.s.as_f64()))
            .with("I", Value::Real(self.state.i.as_f64()))
            .with("R", Value::Real(self.state.r.as_f64()))
    }
}
