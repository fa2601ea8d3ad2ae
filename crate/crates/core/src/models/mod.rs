//! Reference submodels: a continuous SIR model, a stochastic agent-based SIR
//! model with pluggable behaviors, and an exactly solvable decay model.

mod abm;
mod behavior;
mod decay;
mod rk4;
mod sir;
mod workers;

pub use abm::{abm_sir_step, infection_probability, recovery_probability, AbmStepStats};
pub use behavior::{
    set_behavior, BehaviorId, BehaviorPolicy, BehaviorRegistry, Cautious, Standard, CAUTIOUS,
    STANDARD,
};
pub use decay::{decay_step, DecayModel, DecayState};
pub use rk4::rk4_step;
pub use sir::{ebm_sir_step, ebm_sir_step_with, EbmModel, EbmState, SirParams};
pub use workers::{MicroStepWorker, MicroTask, MicroTaskResult, PartitionedRegion};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("derivative is not finite at the current state")]
    NonFiniteDerivative,
    #[error("step size must be positive and finite")]
    NonPositiveStep,
    #[error("behavior `{0}` is not registered")]
    UnknownBehavior(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("injected failure: {0}")]
    Injected(String),
}
