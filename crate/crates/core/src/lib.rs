//! Multilevel modeling and simulation.
//!
//! Submodels with different paradigms and step sizes are composed into a
//! tree, driven by a [`orchestration::Controller`] on an integer tick clock,
//! and exchange data through messages, pipes, futures and a shared store.
//! Epidemic regions switch between agent-based and equation-based resolution
//! while conserving their population exactly.
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix it to `f64`.

pub mod exchange;
pub mod format;
pub mod kernel;
pub mod models;
pub mod multiscale;
pub mod orchestration;
pub mod rng;
pub mod runner;

mod error;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Tally = exchange::ConservedTally<f64>;
pub type Macro = multiscale::MacroState<f64>;
pub type Region = multiscale::EpidemicRegion<f64>;
pub type Sir = models::SirParams<f64>;
pub type Ebm = models::EbmModel<f64>;
pub type Decay = models::DecayModel<f64>;
pub type Behaviors = models::BehaviorRegistry<f64>;
