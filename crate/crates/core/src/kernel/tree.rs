use std::collections::{BTreeMap, HashSet};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{
    EventKind, KernelError, LogEvent, Message, ObservationRecord, RunLog, Snapshot, Submodel,
    Value,
};
use crate::Result;

/// Routes messages emitted by `producer` on `channel` into `consumer`'s inbox.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coupling {
    pub producer: String,
    pub consumer: String,
    pub channel: String,
}

impl Coupling {
    pub fn new(
        producer: impl Into<String>,
        consumer: impl Into<String>,
        channel: impl Into<String>,
    ) -> Self {
        Self {
            producer: producer.into(),
            consumer: consumer.into(),
            channel: channel.into(),
        }
    }

    fn matches(&self, msg: &Message) -> bool {
        self.producer == msg.source && self.channel == msg.channel
    }
}

/// A node of the model tree: an atomic submodel or a composite of nodes.
///
/// Ownership makes the tree acyclic and keeps every submodel under one parent.
pub enum ModelNode {
    Leaf(Box<dyn Submodel>),
    Composite(Composite),
}

impl std::fmt::Debug for ModelNode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelNode::Leaf(m) => f.debug_tuple("Leaf").field(&m.id()).finish(),
            ModelNode::Composite(c) => f
                .debug_struct("Composite")
                .field("id", &c.id)
                .field("children", &c.children)
                .finish(),
        }
    }
}

impl ModelNode {
    pub fn leaf(model: impl Submodel + 'static) -> Self {
        ModelNode::Leaf(Box::new(model))
    }

    /// Every identifier in the subtree, preorder.
    pub fn ids(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_ids(&mut out);
        out
    }

    fn collect_ids(&self, out: &mut Vec<String>) {
        out.push(self.id().to_owned());
        if let ModelNode::Composite(c) = self {
            for child in &c.children {
                child.collect_ids(out);
            }
        }
    }

    pub fn leaf_ids(&self) -> Vec<String> {
        match self {
            ModelNode::Leaf(m) => vec![m.id().to_owned()],
            ModelNode::Composite(c) => c.children.iter().flat_map(|n| n.leaf_ids()).collect(),
        }
    }

    /// One record per leaf, in declaration order.
    pub fn observe_leaves(&self, tick: u64) -> Vec<ObservationRecord> {
        match self {
            ModelNode::Leaf(m) => vec![m.observe(tick)],
            ModelNode::Composite(c) => c
                .children
                .iter()
                .flat_map(|n| n.observe_leaves(tick))
                .collect(),
        }
    }

    pub fn as_composite(&self) -> Option<&Composite> {
        match self {
            ModelNode::Composite(c) => Some(c),
            ModelNode::Leaf(_) => None,
        }
    }

    /// Splits a composite root into its children and couplings; a leaf root
    /// becomes a single participant.
    pub fn into_participants(self) -> (Vec<ModelNode>, Vec<Coupling>) {
        match self {
            ModelNode::Composite(c) => (c.children, c.couplings),
            leaf => (vec![leaf], Vec::new()),
        }
    }
}

impl Submodel for ModelNode {
    fn id(&self) -> &str {
        match self {
            ModelNode::Leaf(m) => m.id(),
            ModelNode::Composite(c) => &c.id,
        }
    }

    fn step_ticks(&self) -> u64 {
        match self {
            ModelNode::Leaf(m) => m.step_ticks(),
            ModelNode::Composite(c) => c.step_ticks,
        }
    }

    fn initialize(&mut self, seed: u64) -> Result<()> {
        let id = self.id().to_owned();
        match self {
            ModelNode::Leaf(m) => m.initialize(seed),
            ModelNode::Composite(c) => c.initialize(seed),
        }
        .map_err(|e| e.at(&id, 0))
    }

    fn step(
        &mut self,
        from_tick: u64,
        step_ticks: u64,
        inbox: &[Message],
        log: &mut RunLog,
    ) -> Result<Vec<Message>> {
        log.push(LogEvent::new(from_tick, EventKind::Step, self.id()).field("len", step_ticks));
        let id = self.id().to_owned();
        match self {
            ModelNode::Leaf(m) => m.step(from_tick, step_ticks, inbox, log),
            ModelNode::Composite(c) => c.step(from_tick, step_ticks, inbox, log),
        }
        .map_err(|e| e.at(&id, from_tick))
    }

    fn snapshot(&self, tick: u64) -> Result<Snapshot> {
        match self {
            ModelNode::Leaf(m) => m.snapshot(tick),
            ModelNode::Composite(c) => c.snapshot(tick),
        }
    }

    fn restore(&mut self, snapshot: &Snapshot) -> Result<()> {
        match self {
            ModelNode::Leaf(m) => m.restore(snapshot),
            ModelNode::Composite(c) => c.restore(snapshot),
        }
    }

    fn observe(&self, tick: u64) -> ObservationRecord {
        match self {
            ModelNode::Leaf(m) => m.observe(tick),
            ModelNode::Composite(c) => c.observe(tick),
        }
    }
}

/// Children stepped in declaration order; messages produced during one substep
/// are delivered to their consumers at the consumer's next substep.
pub struct Composite {
    id: String,
    step_ticks: u64,
    children: Vec<ModelNode>,
    couplings: Vec<Coupling>,
    /// Undelivered inbox per child, in child order.
    pending: Vec<Vec<Message>>,
}

#[derive(Serialize, Deserialize)]
struct CompositeImage {
    pending: Vec<Vec<Message>>,
    children: Vec<Snapshot>,
}

impl Composite {
    /// Validates commensurability, id uniqueness and coupling endpoints.
    pub fn new(
        id: impl Into<String>,
        step_ticks: u64,
        children: Vec<ModelNode>,
        couplings: Vec<Coupling>,
    ) -> Result<Self, KernelError> {
        let id = id.into();
        if step_ticks == 0 {
            return Err(KernelError::ZeroStep(id));
        }
        let mut seen = HashSet::new();
        seen.insert(id.clone());
        for child in &children {
            let child_step = child.step_ticks();
            if child_step == 0 {
                return Err(KernelError::ZeroStep(child.id().to_owned()));
            }
            if !step_ticks.is_multiple_of(child_step) {
                return Err(KernelError::ScheduleMismatch {
                    parent: id.clone(),
                    child: child.id().to_owned(),
                    parent_step: step_ticks,
                    child_step,
                });
            }
            for sub in child.ids() {
                if !seen.insert(sub.clone()) {
                    return Err(KernelError::DuplicateId(sub));
                }
            }
        }
        for c in &couplings {
            if !children.iter().any(|n| n.id() == c.consumer) {
                return Err(KernelError::UnknownCouplingEndpoint(c.consumer.clone()));
            }
        }
        let pending = vec![Vec::new(); children.len()];
        Ok(Self {
            id,
            step_ticks,
            children,
            couplings,
            pending,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn children(&self) -> &[ModelNode] {
        &self.children
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    fn child_index(&self, id: &str) -> Option<usize> {
        self.children.iter().position(|n| n.id() == id)
    }

    /// Queues `msg` for every consumer coupled to its `(source, channel)`.
    /// Returns `false` if no coupling matched.
    fn route(&mut self, msg: &Message) -> bool {
        let targets: Vec<usize> = self
            .couplings
            .iter()
            .filter(|c| c.matches(msg))
            .filter_map(|c| self.child_index(&c.consumer))
            .collect();
        for &t in &targets {
            self.pending[t].push(msg.clone());
        }
        !targets.is_empty()
    }

    fn initialize(&mut self, seed: u64) -> Result<()> {
        self.pending.iter_mut().for_each(Vec::clear);
        self.children
            .iter_mut()
            .try_for_each(|c| c.initialize(seed))
    }

    fn step(
        &mut self,
        from_tick: u64,
        step_ticks: u64,
        inbox: &[Message],
        log: &mut RunLog,
    ) -> Result<Vec<Message>> {
        for child in &self.children {
            if !step_ticks.is_multiple_of(child.step_ticks()) {
                return Err(KernelError::ScheduleMismatch {
                    parent: self.id.clone(),
                    child: child.id().to_owned(),
                    parent_step: step_ticks,
                    child_step: child.step_ticks(),
                }
                .into());
            }
        }
        // inbox messages from outside enter through couplings; unmatched ones are dropped
        for msg in inbox {
            self.route(msg);
        }
        if self.children.is_empty() {
            return Ok(Vec::new());
        }
        let stride = self
            .children
            .iter()
            .map(|c| c.step_ticks())
            .fold(0u64, |g, s| g.gcd(&s));
        let mut outbox = Vec::new();
        let mut tick = from_tick;
        while tick < from_tick + step_ticks {
            let mut produced = Vec::new();
            for i in 0..self.children.len() {
                let child_step = self.children[i].step_ticks();
                if !tick.is_multiple_of(child_step) {
                    continue;
                }
                let inbox = std::mem::take(&mut self.pending[i]);
                produced.extend(self.children[i].step(tick, child_step, &inbox, log)?);
            }
            for msg in produced {
                if !self.route(&msg) {
                    outbox.push(msg);
                }
            }
            tick += stride;
        }
        Ok(outbox)
    }

    fn snapshot(&self, tick: u64) -> Result<Snapshot> {
        let children = self
            .children
            .iter()
            .map(|c| c.snapshot(tick))
            .collect::<Result<Vec<_>>>()?;
        let image = CompositeImage {
            pending: self.pending.clone(),
            children,
        };
        Ok(Snapshot::encode(&self.id, tick, &image)?)
    }

    fn restore(&mut self, snapshot: &Snapshot) -> Result<()> {
        let image: CompositeImage = snapshot.decode(&self.id)?;
        if image.children.len() != self.children.len() || image.pending.len() != self.children.len()
        {
            return Err(KernelError::Codec(format!(
                "composite `{}` image has the wrong arity",
                self.id
            ))
            .into());
        }
        for (child, snap) in self.children.iter_mut().zip(&image.children) {
            child.restore(snap)?;
        }
        self.pending = image.pending;
        Ok(())
    }

    fn own_snapshot(&self, tick: u64) -> Result<Snapshot, KernelError> {
        Snapshot::encode(&self.id, tick, &self.pending)
    }

    fn restore_own(&mut self, snapshot: &Snapshot) -> Result<(), KernelError> {
        let pending: Vec<Vec<Message>> = snapshot.decode(&self.id)?;
        if pending.len() != self.children.len() {
            return Err(KernelError::Codec(format!(
                "composite `{}` pending queues have the wrong arity",
                self.id
            )));
        }
        self.pending = pending;
        Ok(())
    }

    /// Label-wise sum of the leaves' records.
    fn observe(&self, tick: u64) -> ObservationRecord {
        let mut sums: Vec<(String, Value)> = Vec::new();
        for rec in self.children.iter().map(|c| c.observe(tick)) {
            for (label, v) in rec.named_values {
                match sums.iter_mut().find(|(l, _)| *l == label) {
                    Some((_, acc)) => {
                        *acc = match (*acc, v) {
                            (Value::Int(a), Value::Int(b)) => Value::Int(a + b),
                            (a, b) => Value::Real(a.as_f64() + b.as_f64()),
                        }
                    }
                    None => sums.push((label, v)),
                }
            }
        }
        ObservationRecord {
            tick,
            submodel_id: self.id.clone(),
            named_values: sums,
            mode_tag: "composite".into(),
        }
    }
}

/// One snapshot per node (composites carry only their own routing state), preorder.
pub fn snapshot_tree(node: &ModelNode, tick: u64) -> Result<Vec<Snapshot>> {
    let mut out = Vec::new();
    collect_snapshots(node, tick, &mut out)?;
    Ok(out)
}

fn collect_snapshots(node: &ModelNode, tick: u64, out: &mut Vec<Snapshot>) -> Result<()> {
    match node {
        ModelNode::Leaf(m) => out.push(m.snapshot(tick)?),
        ModelNode::Composite(c) => {
            out.push(c.own_snapshot(tick)?);
            for child in &c.children {
                collect_snapshots(child, tick, out)?;
            }
        }
    }
    Ok(())
}

/// Restores a tree from exactly one snapshot per node id, all at the same tick.
pub fn restore_tree(node: &mut ModelNode, snapshots: &[Snapshot]) -> Result<()> {
    let mut by_id: BTreeMap<&str, &Snapshot> = BTreeMap::new();
    for s in snapshots {
        if by_id.insert(&s.submodel_id, s).is_some() {
            return Err(KernelError::DuplicateId(s.submodel_id.clone()).into());
        }
    }
    let ids = node.ids();
    let Some(first) = snapshots.first() else {
        return Err(KernelError::SnapshotSetIncomplete(ids[0].clone()).into());
    };
    let tick = first.tick;
    for id in &ids {
        let snap = by_id
            .get(id.as_str())
            .ok_or_else(|| KernelError::SnapshotSetIncomplete(id.clone()))?;
        if snap.tick != tick {
            return Err(KernelError::TickMismatch {
                id: id.clone(),
                expected: tick,
                found: snap.tick,
            }
            .into());
        }
    }
    if let Some(extra) = by_id.keys().find(|k| !ids.iter().any(|id| id == *k)) {
        return Err(KernelError::UnexpectedSnapshot((*extra).to_owned()).into());
    }
    restore_node(node, &by_id)
}

fn restore_node(node: &mut ModelNode, by_id: &BTreeMap<&str, &Snapshot>) -> Result<()> {
    match node {
        ModelNode::Leaf(m) => {
            let snap = by_id[m.id()];
            m.restore(snap)
        }
        ModelNode::Composite(c) => {
            c.restore_own(by_id[c.id.as_str()])?;
            for child in &mut c.children {
                restore_node(child, by_id)?;
            }
            Ok(())
        }
    }
}
