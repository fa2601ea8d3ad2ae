use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Binding, Compartment, MicroPopulation, MultiscaleError, LABELS};
use crate::exchange::ConservedTally;
use crate::rng::StreamRng;
use crate::{Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    Zoom,
    Puppeteer,
    View,
    Cohabitation,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Zoom => "zoom",
            Strategy::Puppeteer => "puppeteer",
            Strategy::View => "view",
            Strategy::Cohabitation => "cohabitation",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = MultiscaleError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "zoom" => Ok(Strategy::Zoom),
            "puppeteer" => Ok(Strategy::Puppeteer),
            "view" => Ok(Strategy::View),
            "cohabitation" => Ok(Strategy::Cohabitation),
            _ => Err(MultiscaleError::UnknownStrategy(s.to_owned())),
        }
    }
}

/// Aggregate representation of a region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MacroState<T> {
    region_id: String,
    pub tally: ConservedTally<T>,
    /// First id a disaggregation may mint.
    next_agent_id: u64,
}

impl<T: Scalar> MacroState<T> {
    pub fn new(region_id: impl Into<String>, tally: ConservedTally<T>, next_agent_id: u64) -> Self {
        Self {
            region_id: region_id.into(),
            tally,
            next_agent_id,
        }
    }

    pub fn from_counts(region_id: impl Into<String>, counts: [u64; 3]) -> Self {
        Self::new(region_id, ConservedTally::new(LABELS, counts.to_vec()), 0)
    }

    pub fn region_id(&self) -> &str {
        &self.region_id
    }

    pub fn next_agent_id(&self) -> u64 {
        self.next_agent_id
    }

    pub fn counts(&self) -> [u64; 3] {
        let c = self.tally.counts();
        [c[0], c[1], c[2]]
    }

    pub fn total(&self) -> u64 {
        self.tally.total()
    }

    pub fn continuous_view(&self) -> Vec<T> {
        self.tally.continuous_view()
    }

    pub fn infected_mass(&self) -> T {
        self.continuous_view()[Compartment::I.index()]
    }
}

/// Collapses a population into a macro state.
///
/// The tally holds the exact per-label counts with zero residuals. Zoom drops
/// the agents, Puppeteer returns them frozen, View and Cohabitation return
/// them live and bound to the macro state.
pub fn aggregate<T: Scalar>(
    mut pop: MicroPopulation,
    strategy: Strategy,
) -> Result<(MacroState<T>, Option<MicroPopulation>)> {
    if pop.binding() != Binding::Active {
        return Err(MultiscaleError::AlreadyAggregated(pop.region_id().to_owned()).into());
    }
    let state = MacroState::new(
        pop.region_id(),
        ConservedTally::new(LABELS, pop.counts().to_vec()),
        pop.next_id(),
    );
    let retained = match strategy {
        Strategy::Zoom => None,
        Strategy::Puppeteer => {
            for a in pop.agents_mut() {
                a.frozen = true;
            }
            pop.set_binding(Binding::Frozen);
            Some(pop)
        }
        Strategy::View => {
            pop.set_binding(Binding::View);
            Some(pop)
        }
        Strategy::Cohabitation => {
            pop.set_binding(Binding::Cohabitation);
            Some(pop)
        }
    };
    Ok((state, retained))
}

/// Moves every agent past the first `keep` out of a cohabiting population.
/// The macro tally then counts exactly the moved agents.
pub fn bind_cohabitation<T: Scalar>(
    state: &mut MacroState<T>,
    pop: &mut MicroPopulation,
    keep: usize,
) -> Result<()> {
    if pop.binding() != Binding::Cohabitation {
        return Err(MultiscaleError::InvalidPolicy(format!(
            "population of `{}` is not cohabiting",
            pop.region_id()
        ))
        .into());
    }
    let moved = pop.split_off(keep);
    let mut macro_counts = [0u64; 3];
    for a in &moved {
        macro_counts[a.compartment.index()] += 1;
    }
    state.tally = ConservedTally::new(LABELS, macro_counts.to_vec());
    state.next_agent_id = state.next_agent_id.max(pop.next_id());
    Ok(())
}

/// Expands a macro state back into agents whose per-label counts equal the
/// tally counts.
///
/// Zoom mints fresh agents from the tally, which is the apportionment of the
/// continuous view. Puppeteer and View reconcile the retained agents,
/// changing as few as possible. Cohabitation mints agents for the macro part
/// and merges them with the live cohort.
pub fn disaggregate<T: Scalar>(
    state: MacroState<T>,
    strategy: Strategy,
    retained: Option<MicroPopulation>,
    rng: &mut StreamRng,
) -> Result<MicroPopulation> {
    let target = state.counts();
    let missing = || MultiscaleError::RetainedMissing {
        region: state.region_id().to_owned(),
        strategy: strategy.to_string(),
    };
    let (pop, expected) = match strategy {
        Strategy::Zoom => {
            let mut pop = MicroPopulation::new(state.region_id());
            pop.set_next_id(state.next_agent_id());
            pop.mint(target);
            (pop, target)
        }
        Strategy::Puppeteer | Strategy::View => {
            let mut pop = retained.ok_or_else(missing)?;
            for a in pop.agents_mut() {
                a.frozen = false;
            }
            reconcile(&mut pop, target, rng)?;
            pop.set_binding(Binding::Active);
            (pop, target)
        }
        Strategy::Cohabitation => {
            let mut pop = retained.ok_or_else(missing)?;
            let expected = add(pop.counts(), target);
            pop.set_next_id(state.next_agent_id());
            pop.mint(target);
            pop.set_binding(Binding::Active);
            (pop, expected)
        }
    };
    let found = pop.counts();
    if found != expected {
        return Err(MultiscaleError::CountMismatch {
            expected: expected.to_vec(),
            found: found.to_vec(),
        }
        .into());
    }
    Ok(pop)
}

/// Brings per-label counts to `target` by re-labelling the fewest agents.
///
/// Surplus agents of each label are drawn uniformly without replacement and
/// handed to the labels in deficit, both in label order. Returns the number of
/// agents changed.
pub fn reconcile(pop: &mut MicroPopulation, target: [u64; 3], rng: &mut StreamRng) -> Result<usize> {
    let counts = pop.counts();
    if counts.iter().sum::<u64>() != target.iter().sum::<u64>() {
        return Err(MultiscaleError::CountMismatch {
            expected: target.to_vec(),
            found: counts.to_vec(),
        }
        .into());
    }
    let mut movers = Vec::new();
    for c in Compartment::ALL {
        let surplus = counts[c.index()].saturating_sub(target[c.index()]) as usize;
        if surplus == 0 {
            continue;
        }
        let mut eligible: Vec<usize> = pop
            .agents()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.compartment == c)
            .map(|(i, _)| i)
            .collect();
        for _ in 0..surplus {
            let pick = rng.index(eligible.len());
            movers.push(eligible.swap_remove(pick));
        }
    }
    let mut slots = Vec::with_capacity(movers.len());
    for c in Compartment::ALL {
        let deficit = target[c.index()].saturating_sub(counts[c.index()]);
        slots.extend(std::iter::repeat_n(c, deficit as usize));
    }
    debug_assert_eq!(slots.len(), movers.len());
    let agents = pop.agents_mut();
    for (&idx, &c) in movers.iter().zip(&slots) {
        agents[idx].compartment = c;
    }
    Ok(movers.len())
}

/// Overwrites a View population so that it mirrors the macro tally.
pub fn view_refresh<T: Scalar>(
    state: &MacroState<T>,
    pop: &mut MicroPopulation,
    rng: &mut StreamRng,
) -> Result<usize> {
    reconcile(pop, state.counts(), rng)
}

fn add(a: [u64; 3], b: [u64; 3]) -> [u64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
