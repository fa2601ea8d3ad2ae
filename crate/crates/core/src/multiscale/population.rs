use serde::{Deserialize, Serialize};

use crate::models::{BehaviorId, STANDARD};

pub const LABELS: [&str; 3] = ["S", "I", "R"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Compartment {
    S,
    I,
    R,
}

impl Compartment {
    pub const ALL: [Compartment; 3] = [Compartment::S, Compartment::I, Compartment::R];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        LABELS[self.index()]
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn from_label(label: &str) -> Option<Self> {
        LABELS.iter().position(|l| *l == label).map(Self::from_index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agent {
    pub id: u64,
    pub compartment: Compartment,
    /// Frozen agents are driven only by the macro level.
    pub frozen: bool,
    pub behavior: BehaviorId,
}

impl Agent {
    pub fn new(id: u64, compartment: Compartment) -> Self {
        Self {
            id,
            compartment,
            frozen: false,
            behavior: STANDARD,
        }
    }
}

/// How a population currently relates to a macro state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binding {
    /// Authoritative, stepped at the agent level.
    Active,
    /// Held by a Puppeteer macro state.
    Frozen,
    /// Mirror of a View macro state.
    View,
    /// Live cohort next to a Cohabitation macro state.
    Cohabitation,
}

/// Agents of one region, kept sorted by id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroPopulation {
    region_id: String,
    agents: Vec<Agent>,
    next_id: u64,
    binding: Binding,
}

impl MicroPopulation {
    pub fn new(region_id: impl Into<String>) -> Self {
        Self {
            region_id: region_id.into(),
            agents: Vec::new(),
            next_id: 0,
            binding: Binding::Active,
        }
    }

    /// `counts[c]` agents in each compartment, ids `0..n` in compartment order.
    pub fn from_counts(region_id: impl Into<String>, counts: [u64; 3]) -> Self {
        let mut pop = Self::new(region_id);
        pop.mint(counts);
        pop
    }

    /// Appends fresh agents with never-used ids.
    pub fn mint(&mut self, counts: [u64; 3]) {
        for c in Compartment::ALL {
            for _ in 0..counts[c.index()] {
                self.agents.push(Agent::new(self.next_id, c));
                self.next_id += 1;
            }
        }
    }

    pub fn region_id(&self) -> &str {
        &self.region_id
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agents_mut(&mut self) -> &mut [Agent] {
        &mut self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub(crate) fn set_next_id(&mut self, next: u64) {
        self.next_id = self.next_id.max(next);
    }

    pub fn binding(&self) -> Binding {
        self.binding
    }

    pub(crate) fn set_binding(&mut self, binding: Binding) {
        self.binding = binding;
    }

    pub fn counts(&self) -> [u64; 3] {
        let mut counts = [0; 3];
        for a in &self.agents {
            counts[a.compartment.index()] += 1;
        }
        counts
    }

    pub fn infected_fraction(&self) -> f64 {
        if self.agents.is_empty() {
            return 0.0;
        }
        self.counts()[Compartment::I.index()] as f64 / self.agents.len() as f64
    }

    /// Removes and returns every agent whose id is not among the first `keep`.
    pub(crate) fn split_off(&mut self, keep: usize) -> Vec<Agent> {
        self.agents.split_off(keep.min(self.agents.len()))
    }
}
