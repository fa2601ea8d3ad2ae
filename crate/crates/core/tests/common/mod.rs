#![allow(dead_code)]

use std::path::PathBuf;

use multisim::kernel::{Message, ObservationRecord, RunLog, Snapshot, Submodel, Value};
use multisim::models::ModelError;
use multisim::Result;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeState {
    pub steps: u64,
    /// `(from_tick, value)` for every message received.
    pub received: Vec<(u64, i64)>,
    pub acc: i64,
}

/// Counts its steps, records its inbox and emits `from_tick` on channel `v`.
pub struct Probe {
    pub id: String,
    pub step_ticks: u64,
    pub state: ProbeState,
    /// Fail when stepped from this tick.
    pub fail_at: Option<u64>,
}

impl Probe {
    pub fn new(id: &str, step_ticks: u64) -> Self {
        Self {
            id: id.into(),
            step_ticks,
            state: ProbeState::default(),
            fail_at: None,
        }
    }

    pub fn failing_at(mut self, tick: u64) -> Self {
        self.fail_at = Some(tick);
        self
    }
}

impl Submodel for Probe {
    fn id(&self) -> &str {
        &self.id
    }

    fn step_ticks(&self) -> u64 {
        self.step_ticks
    }

    fn initialize(&mut self, seed: u64) -> Result<()> {
        self.state = ProbeState {
            acc: seed as i64,
            ..ProbeState::default()
        };
        Ok(())
    }

    fn step(&mut self, from: u64, _len: u64, inbox: &[Message], _log: &mut RunLog) -> Result<Vec<Message>> {
        if self.fail_at == Some(from) {
            return Err(ModelError::Injected(format!("{} at {from}", self.id)).into());
        }
        self.state.steps += 1;
        for m in inbox {
            let v = m.value.as_int().unwrap_or_default();
            self.state.received.push((from, v));
            self.state.acc += v;
        }
        self.state.acc += 1;
        Ok(vec![Message::new(&self.id, "v", Value::Int(from as i64))])
    }

    fn snapshot(&self, tick: u64) -> Result<Snapshot> {
        Ok(Snapshot::encode(&self.id, tick, &self.state)?)
    }

    fn restore(&mut self, snapshot: &Snapshot) -> Result<()> {
        self.state = snapshot.decode(&self.id)?;
        Ok(())
    }

    fn observe(&self, tick: u64) -> ObservationRecord {
        ObservationRecord::new(tick, &self.id, "probe")
            .with("steps", Value::Int(self.state.steps as i64))
            .with("acc", Value::Int(self.state.acc))
    }
}

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn shipped_scenarios() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .expect("scenarios directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths
}

/// Integer vector summing to `total` closest in L1 to the proportional shares
/// of `weights` (integer weights, exact arithmetic). Among equally close
/// vectors the lexicographically greatest wins, which hands tied units to
/// the lowest index. `None` when all weights are zero and `total > 0`.
pub fn l1_oracle(weights: &[u64], total: u64) -> Option<Vec<u64>> {
    let k: u64 = weights.iter().sum();
    if k == 0 {
        return (total == 0).then(|| vec![0; weights.len()]);
    }
    let mut best: Option<(u128, Vec<u64>)> = None;
    let mut current = vec![0u64; weights.len()];
    visit(&mut current, 0, total, &mut |x| {
        let cost: u128 = x
            .iter()
            .zip(weights)
            .map(|(&xi, &wi)| (xi as i128 * k as i128 - total as i128 * wi as i128).unsigned_abs())
            .sum();
        // compositions arrive in lexicographically descending order
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, x.to_vec()));
        }
    });
    best.map(|(_, x)| x)
}

fn visit(x: &mut Vec<u64>, i: usize, left: u64, f: &mut dyn FnMut(&[u64])) {
    if i + 1 == x.len() {
        x[i] = left;
        f(x);
        return;
    }
    for v in (0..=left).rev() {
        x[i] = v;
        visit(x, i + 1, left - v, f);
    }
}
