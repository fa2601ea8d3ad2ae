use std::fmt;
use std::path::Path;

use super::{Config, ConfigError, RunMeta, Trajectory};
use crate::kernel::{LogLevel, ModelNode, RunLog, SimClock};
use crate::multiscale::LABELS;
use crate::orchestration::{ConservedTotal, Controller, RunConfig};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExecutorMode {
    #[default]
    Sequential,
    /// Participants spread over this many execution units.
    Parallel(usize),
}

impl ExecutorMode {
    pub fn from_cli(mode: &str, units: Option<usize>) -> Result<Self, ConfigError> {
        match mode {
            "sequential" => Ok(ExecutorMode::Sequential),
            "parallel" => {
                let units = units.unwrap_or_else(|| {
                    std::thread::available_parallelism().map_or(1, |n| n.get())
                });
                if units == 0 {
                    return Err(ConfigError::InvalidMode("parallel with 0 units".into()));
                }
                Ok(ExecutorMode::Parallel(units))
            }
            other => Err(ConfigError::InvalidMode(other.to_owned())),
        }
    }
}

impl fmt::Display for ExecutorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecutorMode::Sequential => f.write_str("sequential"),
            ExecutorMode::Parallel(n) => write!(f, "parallel({n})"),
        }
    }
}

/// Runs `tree` to the configured end tick under `mode`.
pub fn execute(tree: ModelNode, clock: SimClock, config: &RunConfig, mode: ExecutorMode) -> Result<Trajectory> {
    let config = config.clone().with_executor(mode);
    Controller::new(tree, clock, config)?.run()
}

pub struct RunOutput {
    pub trajectory: Trajectory,
    pub log: RunLog,
}

/// Builds and runs a configured scenario, checking agent conservation at
/// every checkpoint.
pub fn run_scenario(config: &Config, seed: u64, mode: ExecutorMode) -> Result<RunOutput> {
    let scenario = config.build(seed, mode)?;
    let mut controller = Controller::new(scenario.tree, scenario.clock, scenario.run)?;
    if let Some(total) = scenario.conserved_total {
        controller = controller.with_check(ConservedTotal::new(LABELS, total));
    }
    let mut trajectory = controller.run()?;
    trajectory.meta = RunMeta {
        seed,
        config_digest: config.digest(),
        mode: mode.to_string(),
    };
    Ok(RunOutput {
        trajectory,
        log: controller.log().clone(),
    })
}

/// Writes `trajectory.csv`, `trajectory.meta` and `run.log` under `dir`.
pub fn write_outputs(dir: &Path, output: &RunOutput, level: LogLevel) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv = output.trajectory.to_csv();
    let digest = crate::kernel::digest64(csv.as_bytes());
    let write = |name: &str, text: &str| {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    };
    write("trajectory.csv", &csv)?;
    write("trajectory.meta", &output.trajectory.meta.render(digest))?;
    write("run.log", &output.log.render(level))?;
    Ok(())
}
