//! Agent behaviors, kept apart from the agents that use them.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::multiscale::{Agent, Compartment};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BehaviorId(pub u16);

impl fmt::Display for BehaviorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "behavior#{}", self.0)
    }
}

pub const STANDARD: BehaviorId = BehaviorId(0);
pub const CAUTIOUS: BehaviorId = BehaviorId(1);

/// How an agent responds to the infection hazard it is exposed to over a step.
///
/// A behavior is a pure function of the agent, the integrated hazard
/// (`rate * h`) and one uniform draw.
pub trait BehaviorPolicy<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn infection_probability(&self, hazard: T) -> T;

    fn react(&self, agent: &Agent, hazard: T, draw: f64) -> Compartment {
        match agent.compartment {
            Compartment::S if T::lit(draw) < self.infection_probability(hazard) => Compartment::I,
            other => other,
        }
    }
}

/// Exposed to the full hazard.
pub struct Standard;

impl<T: Scalar> BehaviorPolicy<T> for Standard {
    fn name(&self) -> &str {
        "standard"
    }

    fn infection_probability(&self, hazard: T) -> T {
        T::one() - (-hazard).exp()
    }
}

/// Scales the hazard by `factor`.
pub struct Cautious {
    pub factor: f64,
}

impl<T: Scalar> BehaviorPolicy<T> for Cautious {
    fn name(&self) -> &str {
        "cautious"
    }

    fn infection_probability(&self, hazard: T) -> T {
        T::one() - (-(T::lit(self.factor) * hazard)).exp()
    }
}

pub struct BehaviorRegistry<T: Scalar> {
    entries: Vec<Box<dyn BehaviorPolicy<T>>>,
}

impl<T: Scalar> BehaviorRegistry<T> {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    /// `standard` at [`STANDARD`] and a half-hazard `cautious` at [`CAUTIOUS`].
    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register(Standard);
        r.register(Cautious { factor: 0.5 });
        r
    }

    pub fn register(&mut self, policy: impl BehaviorPolicy<T> + 'static) -> BehaviorId {
        self.entries.push(Box::new(policy));
        BehaviorId((self.entries.len() - 1) as u16)
    }

    pub fn get(&self, id: BehaviorId) -> Result<&dyn BehaviorPolicy<T>, ModelError> {
        self.entries
            .get(id.0 as usize)
            .map(|b| b.as_ref())
            .ok_or_else(|| ModelError::UnknownBehavior(id.to_string()))
    }

    pub fn lookup(&self, name: &str) -> Option<BehaviorId> {
        self.entries
            .iter()
            .position(|b| b.name() == name)
            .map(|i| BehaviorId(i as u16))
    }
}

impl<T: Scalar> Default for BehaviorRegistry<T> {
    fn default() -> Self {
        Self::standard()
    }
}

/// Points `agent` at another behavior; identity and compartment are untouched.
pub fn set_behavior<T: Scalar>(
    agent: &mut Agent,
    behavior: BehaviorId,
    registry: &BehaviorRegistry<T>,
) -> Result<(), ModelError> {
    registry.get(behavior)?;
    agent.behavior = behavior;
    Ok(())
}
