//! Moving a region between the agent level and the aggregate level.
//!
//! Four realizations are supported when a region is aggregated:
//!
//! * **Zoom** destroys the agents; disaggregation mints fresh ones.
//! * **Puppeteer** freezes the agents; the macro state drives them until they
//!   are released and nudged back into agreement with the macro tally.
//! * **View** keeps the agents live but overwrites them after every macro step
//!   so they mirror the macro state.
//! * **Cohabitation** keeps a cohort of agents live next to a macro state for
//!   the rest of the region; both influence each other every step.
//!
//! [`MacroAsMicroAdapter`] lets a macro zone answer the queries of a micro zone,
//! and [`evaluate_switch`] decides when a region should change level.

mod adapter;
mod aggregation;
mod cohabit;
mod population;
mod region;
mod switch;

pub use adapter::{MacroAsMicroAdapter, MicroZone, MicroZoneModel, ZoneQuery, ZoneResponse};
pub use aggregation::{
    aggregate, bind_cohabitation, disaggregate, reconcile, view_refresh, MacroState, Strategy,
};
pub use cohabit::{cohabit_step, macro_step, Forcing};
pub use population::{Agent, Binding, Compartment, MicroPopulation, LABELS};
pub use region::{EpidemicRegion, RegionConfig, INFECTED_FRACTION};
pub use switch::{evaluate_switch, Decision, Mode, SwitchPolicy};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MultiscaleError {
    #[error("population of `{0}` is already aggregated")]
    AlreadyAggregated(String),
    #[error("{strategy} disaggregation of `{region}` needs the retained population")]
    RetainedMissing { region: String, strategy: String },
    #[error("per-label counts {found:?} disagree with the macro tally {expected:?}")]
    CountMismatch { expected: Vec<u64>, found: Vec<u64> },
    #[error("query `{0}` is not supported by an aggregated zone")]
    UnsupportedQuery(String),
    #[error("invalid switch policy: {0}")]
    InvalidPolicy(String),
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
}
