use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ConfigError, ExecutorMode};
use crate::format::{parse_ratio, ratio_to_f64};
use crate::kernel::{digest64, Composite, Coupling, ModelNode, SimClock};
use crate::models::{BehaviorRegistry, DecayModel, EbmModel, MicroStepWorker, PartitionedRegion, SirParams};
use crate::multiscale::{EpidemicRegion, RegionConfig, Strategy, SwitchPolicy, INFECTED_FRACTION};
use crate::orchestration::{Director, OnHold, Realization, RunConfig, WorkerPool};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub clock: ClockSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub switch: SwitchSection,
    #[serde(default)]
    pub output: OutputSection,
    pub tree: TreeSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockSection {
    /// Seconds per tick, e.g. `"1/50"` or `"0.02"`.
    pub quantum: String,
    pub end_tick: u64,
    pub checkpoint_interval: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub beta: f64,
    pub gamma: f64,
    pub n_total: u64,
    pub i0: u64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self {
            beta: 0.3,
            gamma: 0.1,
            n_total: 1000,
            i0: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchSection {
    pub theta_up: f64,
    pub theta_down: f64,
    #[serde(default)]
    pub dwell_ticks: u64,
    pub strategy: String,
    #[serde(default = "default_cohabit_share")]
    pub cohabit_share: f64,
}

fn default_cohabit_share() -> f64 {
    0.1
}

impl Default for SwitchSection {
    fn default() -> Self {
        Self {
            theta_up: 0.1,
            theta_down: 0.05,
            dwell_ticks: 0,
            strategy: "zoom".into(),
            cohabit_share: default_cohabit_share(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSection {
    #[serde(default = "default_root")]
    pub id: String,
    #[serde(default)]
    pub participants: Vec<ParticipantSpec>,
    #[serde(default)]
    pub couplings: Vec<CouplingSpec>,
}

fn default_root() -> String {
    "root".into()
}

/// One child of the root. `kind` is `region`, `ebm`, `decay` or `director`;
/// the remaining fields apply to the kinds that use them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticipantSpec {
    pub kind: String,
    pub id: String,
    /// Local step in seconds; one quantum when absent.
    pub step: Option<String>,
    pub n: Option<u64>,
    pub i0: Option<u64>,
    pub strategy: Option<String>,
    pub coupling_weight: Option<f64>,
    pub y0: Option<f64>,
    pub rate: Option<f64>,
    pub partitions: Option<usize>,
    /// `on_hold` or `pool`.
    pub realization: Option<String>,
    pub capacity: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub from: String,
    pub to: String,
    #[serde(default = "default_channel")]
    pub channel: String,
}

fn default_channel() -> String {
    INFECTED_FRACTION.into()
}

/// A validated, runnable model.
pub struct Scenario {
    pub tree: ModelNode,
    pub clock: SimClock,
    pub run: RunConfig,
    /// Agent total that every checkpoint must reproduce exactly.
    pub conserved_total: Option<i64>,
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_owned()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    /// Digest of the canonical serialization.
    pub fn digest(&self) -> u64 {
        let canonical = toml::to_string(self).expect("config serializes");
        digest64(canonical.as_bytes())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.build(self.run.seed, ExecutorMode::Sequential).map(|_| ())
    }

    pub fn build(&self, seed: u64, mode: ExecutorMode) -> Result<Scenario, ConfigError> {
        let quantum = parse_ratio(&self.clock.quantum)
            .ok_or_else(|| invalid(format!("bad quantum `{}`", self.clock.quantum)))?;
        let clock = SimClock::new(quantum).map_err(|e| invalid(e.to_string()))?;
        let mut run = RunConfig::new(seed, self.clock.end_tick, self.clock.checkpoint_interval)
            .with_executor(mode);
        run.out_dir = self.output.dir.as_ref().map(Into::into);
        run.validate().map_err(|e| invalid(e.to_string()))?;

        let behaviors = Arc::new(BehaviorRegistry::<f64>::standard());
        let default_strategy: Strategy =
            self.switch.strategy.parse().map_err(|e: crate::multiscale::MultiscaleError| invalid(e.to_string()))?;
        let mut children = Vec::with_capacity(self.tree.participants.len());
        let mut conserved: Option<i64> = None;
        for p in &self.tree.participants {
            let step_ticks = match &p.step {
                None => 1,
                Some(text) => {
                    let secs = parse_ratio(text)
                        .ok_or_else(|| invalid(format!("`{}`: bad step `{text}`", p.id)))?;
                    clock.ticks_for(secs).map_err(|e| invalid(format!("`{}`: {e}", p.id)))?
                }
            };
            let h = ratio_to_f64(clock.seconds(step_ticks));
            let n = p.n.unwrap_or(self.params.n_total);
            let i0 = p.i0.unwrap_or(self.params.i0);
            let sir = || {
                SirParams::new(self.params.beta, self.params.gamma, n)
                    .map_err(|e| invalid(format!("`{}`: {e}", p.id)))
            };
            let node = match p.kind.as_str() {
                "region" => {
                    let strategy = match &p.strategy {
                        Some(s) => s.parse().map_err(|e: crate::multiscale::MultiscaleError| invalid(e.to_string()))?,
                        None => default_strategy,
                    };
                    let policy = SwitchPolicy::new(
                        self.switch.theta_up,
                        self.switch.theta_down,
                        self.switch.dwell_ticks,
                        strategy,
                    )
                    .map_err(|e| invalid(e.to_string()))?;
                    *conserved.get_or_insert(0) += n as i64;
                    let config = RegionConfig {
                        id: p.id.clone(),
                        step_ticks,
                        h,
                        params: sir()?,
                        i0,
                        policy,
                        coupling_weight: p.coupling_weight.unwrap_or(0.0),
                        cohabit_share: self.switch.cohabit_share,
                    };
                    ModelNode::leaf(EpidemicRegion::new(config, Arc::clone(&behaviors)))
                }
                "ebm" => ModelNode::leaf(EbmModel::new(&p.id, step_ticks, h, sir()?, i0)),
                "decay" => {
                    let rate = p.rate.unwrap_or(1.0);
                    let y0 = p.y0.unwrap_or(1.0);
                    if !(rate >= 0.0 && y0 >= 0.0) {
                        return Err(invalid(format!("`{}`: rate and y0 must be non-negative", p.id)));
                    }
                    ModelNode::leaf(DecayModel::new(&p.id, step_ticks, h, y0, rate))
                }
                "director" => {
                    *conserved.get_or_insert(0) += n as i64;
                    let model = PartitionedRegion::new(
                        &p.id,
                        step_ticks,
                        h,
                        sir()?,
                        i0,
                        p.partitions.unwrap_or(4),
                    );
                    let factory = {
                        let behaviors = Arc::clone(&behaviors);
                        move |id| MicroStepWorker::new(id, Arc::clone(&behaviors))
                    };
                    let realization = match p.realization.as_deref().unwrap_or("pool") {
                        "on_hold" => Realization::OnHold(OnHold::new(factory)),
                        "pool" => Realization::OnDemand(
                            WorkerPool::new(p.capacity.unwrap_or(4), factory)
                                .map_err(|e| invalid(e.to_string()))?,
                        ),
                        other => return Err(invalid(format!("unknown realization `{other}`"))),
                    };
                    ModelNode::leaf(Director::new(model, realization))
                }
                other => return Err(ConfigError::UnknownKind(other.to_owned())),
            };
            children.push(node);
        }
        let couplings = self
            .tree
            .couplings
            .iter()
            .map(|c| Coupling::new(&c.from, &c.to, &c.channel))
            .collect::<Vec<_>>();
        for c in &couplings {
            if !self.tree.participants.iter().any(|p| p.id == c.producer) {
                return Err(invalid(format!("coupling from unknown `{}`", c.producer)));
            }
        }
        let root = Composite::new(&self.tree.id, self.clock.checkpoint_interval, children, couplings)
            .map_err(|e| invalid(e.to_string()))?;
        Ok(Scenario {
            tree: ModelNode::Composite(root),
            clock,
            run,
            conserved_total: conserved,
        })
    }
}
