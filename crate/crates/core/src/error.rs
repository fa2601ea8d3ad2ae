use thiserror::Error;

use crate::exchange::ExchangeError;
use crate::kernel::KernelError;
use crate::models::ModelError;
use crate::multiscale::MultiscaleError;
use crate::orchestration::OrchestrationError;
use crate::runner::ConfigError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Orchestration(#[from] OrchestrationError),
    #[error(transparent)]
    Exchange(#[from] ExchangeError),
    #[error(transparent)]
    Multiscale(#[from] MultiscaleError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// A failure raised inside a submodel, attributed to where it happened.
    #[error("submodel `{id}` failed at tick {tick}: {source}")]
    Submodel {
        id: String,
        tick: u64,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn at(self, id: &str, tick: u64) -> Self {
        match self {
            // keep the innermost attribution
            e @ Error::Submodel { .. } => e,
            other => Error::Submodel {
                id: id.to_owned(),
                tick,
                source: Box::new(other),
            },
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Innermost attribution `(submodel_id, tick)` if the error came out of a submodel.
    pub fn attribution(&self) -> Option<(&str, u64)> {
        match self {
            Error::Submodel { id, tick, .. } => Some((id, *tick)),
            _ => None,
        }
    }
}
