//! Well-mixed stochastic SIR over a population of agents.

use super::{BehaviorRegistry, ModelError, SirParams};
use crate::multiscale::{Compartment, MicroPopulation};
use crate::rng::StreamRng;
use crate::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AbmStepStats {
    pub infections: u64,
    pub recoveries: u64,
}

/// `1 - exp(-beta * infected_fraction * h)`.
pub fn infection_probability<T: Scalar>(beta: T, infected_fraction: T, h: T) -> T {
    T::one() - (-(beta * infected_fraction * h)).exp()
}

/// `1 - exp(-gamma * h)`.
pub fn recovery_probability<T: Scalar>(gamma: T, h: T) -> T {
    T::one() - (-(gamma * h)).exp()
}

/// Advances every unfrozen agent by `h`.
///
/// Draw discipline: one draw per susceptible in id order, then one draw per
/// agent that was infected at the start of the step, in id order. Frozen
/// agents draw nothing.
pub fn abm_sir_step<T: Scalar>(
    pop: &mut MicroPopulation,
    params: &SirParams<T>,
    h: T,
    infected_fraction: T,
    rng: &mut StreamRng,
    behaviors: &BehaviorRegistry<T>,
) -> Result<AbmStepStats, ModelError> {
    if !(h > T::zero()) {
        return Err(ModelError::NonPositiveStep);
    }
    let hazard = params.beta * infected_fraction * h;
    let p_recover = recovery_probability(params.gamma, h);
    let mut stats = AbmStepStats::default();

    let infected_at_start: Vec<usize> = pop
        .agents()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.compartment == Compartment::I && !a.frozen)
        .map(|(i, _)| i)
        .collect();

    for agent in pop.agents_mut() {
        if agent.frozen || agent.compartment != Compartment::S {
            continue;
        }
        let draw = rng.uniform();
        let next = behaviors.get(agent.behavior)?.react(agent, hazard, draw);
        if next == Compartment::I {
            stats.infections += 1;
        }
        agent.compartment = next;
    }
    let agents = pop.agents_mut();
    for idx in infected_at_start {
        let draw = rng.uniform();
        if T::lit(draw) < p_recover {
            agents[idx].compartment = Compartment::R;
            stats.recoveries += 1;
        }
    }
    Ok(stats)
}
