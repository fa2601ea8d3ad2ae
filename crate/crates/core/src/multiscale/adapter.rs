use std::sync::Arc;

use super::{macro_step, Compartment, Forcing, MacroState, MicroPopulation, MultiscaleError};
use crate::models::{abm_sir_step, BehaviorRegistry, SirParams};
use crate::rng::StreamRng;
use crate::{Result, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZoneQuery {
    Count(String),
    Total,
    AgentState(u64),
    Step,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZoneResponse {
    Count(u64),
    Total(u64),
    Agent(Compartment),
    Stepped,
}

/// Client-side contract of a zone simulated at the agent level.
pub trait MicroZone {
    fn zone_id(&self) -> &str;
    fn query(&mut self, query: &ZoneQuery) -> Result<ZoneResponse>;
}

fn count_of(label: &str, counts: [u64; 3]) -> Result<ZoneResponse> {
    let c = Compartment::from_label(label)
        .ok_or_else(|| MultiscaleError::UnsupportedQuery(format!("count({label})")))?;
    Ok(ZoneResponse::Count(counts[c.index()]))
}

/// A zone backed by agents.
pub struct MicroZoneModel<T: Scalar> {
    pub population: MicroPopulation,
    params: SirParams<T>,
    h: T,
    rng: StreamRng,
    behaviors: Arc<BehaviorRegistry<T>>,
}

impl<T: Scalar> MicroZoneModel<T> {
    pub fn new(
        population: MicroPopulation,
        params: SirParams<T>,
        h: T,
        rng: StreamRng,
        behaviors: Arc<BehaviorRegistry<T>>,
    ) -> Self {
        Self {
            population,
            params,
            h,
            rng,
            behaviors,
        }
    }
}

impl<T: Scalar> MicroZone for MicroZoneModel<T> {
    fn zone_id(&self) -> &str {
        self.population.region_id()
    }

    fn query(&mut self, query: &ZoneQuery) -> Result<ZoneResponse> {
        match query {
            ZoneQuery::Count(label) => count_of(label, self.population.counts()),
            ZoneQuery::Total => Ok(ZoneResponse::Total(self.population.len() as u64)),
            ZoneQuery::AgentState(id) => self
                .population
                .agents()
                .iter()
                .find(|a| a.id == *id)
                .map(|a| ZoneResponse::Agent(a.compartment))
                .ok_or_else(|| MultiscaleError::UnsupportedQuery(format!("agent_state({id})")).into()),
            ZoneQuery::Step => {
                let fraction = T::lit(self.population.infected_fraction());
                abm_sir_step(
                    &mut self.population,
                    &self.params,
                    self.h,
                    fraction,
                    &mut self.rng,
                    &self.behaviors,
                )?;
                Ok(ZoneResponse::Stepped)
            }
        }
    }
}

/// Presents a macro state through the [`MicroZone`] contract.
///
/// Counts are read through from the tally and steps advance the macro state.
/// Agent identity queries are not supported.
pub struct MacroAsMicroAdapter<T: Scalar> {
    inner: MacroState<T>,
    params: SirParams<T>,
    h: T,
}

impl<T: Scalar> MacroAsMicroAdapter<T> {
    pub fn new(inner: MacroState<T>, params: SirParams<T>, h: T) -> Self {
        Self { inner, params, h }
    }

    pub fn inner(&self) -> &MacroState<T> {
        &self.inner
    }

    pub fn into_inner(self) -> MacroState<T> {
        self.inner
    }
}

impl<T: Scalar> MicroZone for MacroAsMicroAdapter<T> {
    fn zone_id(&self) -> &str {
        self.inner.region_id()
    }

    fn query(&mut self, query: &ZoneQuery) -> Result<ZoneResponse> {
        match query {
            ZoneQuery::Count(label) => count_of(label, self.inner.counts()),
            ZoneQuery::Total => Ok(ZoneResponse::Total(self.inner.total())),
            ZoneQuery::AgentState(id) => {
                Err(MultiscaleError::UnsupportedQuery(format!("agent_state(id={id})")).into())
            }
            ZoneQuery::Step => {
                macro_step(&mut self.inner, &self.params, self.h, Forcing::none())?;
                Ok(ZoneResponse::Stepped)
            }
        }
    }
}
