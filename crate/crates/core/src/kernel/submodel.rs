use std::fmt;

use serde::{Deserialize, Serialize};

use super::{RunLog, Snapshot};
use crate::format::format_real;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Int(i64),
    Real(f64),
}

impl Value {
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Int(n) => n as f64,
            Value::Real(x) => x,
        }
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(n),
            Value::Real(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Real(x) => f.write_str(&format_real(*x)),
        }
    }
}

/// A unit of cross-submodel influence. Routed by `(source, channel)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub source: String,
    pub channel: String,
    pub value: Value,
}

impl Message {
    pub fn new(source: impl Into<String>, channel: impl Into<String>, value: Value) -> Self {
        Self {
            source: source.into(),
            channel: channel.into(),
            value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationRecord {
    pub tick: u64,
    pub submodel_id: String,
    pub named_values: Vec<(String, Value)>,
    pub mode_tag: String,
}

impl ObservationRecord {
    pub fn new(tick: u64, submodel_id: impl Into<String>, mode_tag: impl Into<String>) -> Self {
        Self {
            tick,
            submodel_id: submodel_id.into(),
            named_values: Vec::new(),
            mode_tag: mode_tag.into(),
        }
    }

    /// Appends a value. Panics if `label` is already present.
    pub fn with(mut self, label: impl Into<String>, value: Value) -> Self {
        let label = label.into();
        assert!(
            self.get(&label).is_none(),
            "duplicate observation label `{label}`"
        );
        self.named_values.push((label, value));
        self
    }

    pub fn get(&self, label: &str) -> Option<Value> {
        self.named_values
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| *v)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.named_values.iter().map(|(l, _)| l.as_str())
    }

    /// Sum of the integer values under `labels`; `None` if any is missing or real.
    pub fn int_sum(&self, labels: &[&str]) -> Option<i64> {
        labels
            .iter()
            .map(|l| self.get(l).and_then(Value::as_int))
            .sum()
    }
}

/// The stepping, snapshot and observation contract shared by leaf models,
/// composites and directors.
///
/// `step` must be deterministic given the current state, `from_tick`, the inbox
/// and the model's own RNG stream. `restore(snapshot(t))` must leave `observe`
/// and every later step unchanged.
pub trait Submodel: Send {
    fn id(&self) -> &str;

    /// Local step in base quanta.
    fn step_ticks(&self) -> u64;

    fn initialize(&mut self, seed: u64) -> Result<()>;

    /// Advances from `from_tick` by `step_ticks` and returns the outbox.
    fn step(
        &mut self,
        from_tick: u64,
        step_ticks: u64,
        inbox: &[Message],
        log: &mut RunLog,
    ) -> Result<Vec<Message>>;

    fn snapshot(&self, tick: u64) -> Result<Snapshot>;

    fn restore(&mut self, snapshot: &Snapshot) -> Result<()>;

    fn observe(&self, tick: u64) -> ObservationRecord;
}
