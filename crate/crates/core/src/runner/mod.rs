//! Executors, configuration, trajectory output and the command-line front end.

mod cli;
mod config;
mod executor;
mod trajectory;

pub use cli::{cli_main, Cli};
pub use config::{
    ClockSection, Config, CouplingSpec, OutputSection, ParamsSection, ParticipantSpec, RunSection,
    Scenario, SwitchSection, TreeSection,
};
pub use executor::{execute, run_scenario, write_outputs, ExecutorMode, RunOutput};
pub use trajectory::{RunMeta, Trajectory};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("unknown participant kind `{0}`")]
    UnknownKind(String),
    #[error("invalid executor mode `{0}`")]
    InvalidMode(String),
}
