use super::{Compartment, MacroState, MicroPopulation};
use crate::models::{abm_sir_step, ebm_sir_step_with, AbmStepStats, BehaviorRegistry, EbmState, SirParams};
use crate::rng::StreamRng;
use crate::{Result, Scalar};

/// Mixing of a region's own infected fraction with an external one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Forcing<T> {
    pub weight: T,
    pub external: T,
}

impl<T: Scalar> Forcing<T> {
    pub fn none() -> Self {
        Self {
            weight: T::zero(),
            external: T::zero(),
        }
    }

    pub fn effective(&self, local: T) -> T {
        (T::one() - self.weight) * local + self.weight * self.external
    }
}

impl<T: Scalar> Default for Forcing<T> {
    fn default() -> Self {
        Self::none()
    }
}

/// Continuous step of a macro state with `extra_infected` mass and
/// `extra_total` individuals outside the tally contributing to the hazard.
fn macro_update<T: Scalar>(
    state: &mut MacroState<T>,
    params: &SirParams<T>,
    h: T,
    forcing: Forcing<T>,
    extra_infected: T,
    extra_total: T,
) -> Result<()> {
    if state.total() == 0 {
        return Ok(());
    }
    let view = state.continuous_view();
    let n = T::from_count(state.total()) + extra_total;
    let beta = params.beta;
    let before = EbmState::new(view[0], view[1], view[2]);
    let after = ebm_sir_step_with(before, params, h, |y| {
        beta * forcing.effective((y.i + extra_infected) / n)
    })?;
    let delta = [after.s - before.s, after.i - before.i, after.r - before.r];
    state.tally.absorb(&delta)?;
    Ok(())
}

/// One equation-based step of a macro state; the tally absorbs the change.
pub fn macro_step<T: Scalar>(
    state: &mut MacroState<T>,
    params: &SirParams<T>,
    h: T,
    forcing: Forcing<T>,
) -> Result<()> {
    macro_update(state, params, h, forcing, T::zero(), T::zero())
}

/// Steps a cohabiting pair. Both halves see the combined infected fraction
/// taken at the start of the step.
pub fn cohabit_step<T: Scalar>(
    state: &mut MacroState<T>,
    pop: &mut MicroPopulation,
    params: &SirParams<T>,
    h: T,
    forcing: Forcing<T>,
    rng: &mut StreamRng,
    behaviors: &BehaviorRegistry<T>,
) -> Result<AbmStepStats> {
    let micro_i = T::from_count(pop.counts()[Compartment::I.index()]);
    let micro_n = T::from_count(pop.len() as u64);
    let macro_i = state.infected_mass();
    let total = micro_n + T::from_count(state.total());
    let fraction = if total > T::zero() {
        (micro_i + macro_i) / total
    } else {
        T::zero()
    };
    let stats = abm_sir_step(pop, params, h, forcing.effective(fraction), rng, behaviors)?;
    macro_update(state, params, h, forcing, micro_i, micro_n)?;
    Ok(stats)
}
