//! Blackboard store with one writer per namespace.
//!
//! Each namespace has a declared owner; only the owner may put. Readers see a
//! value together with the version it was committed under, and a put bumps the
//! key's version by exactly one.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::{ConservedTally, ExchangeError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StoreValue {
    Int(i64),
    Real(f64),
    Text(String),
    Tally(ConservedTally<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versioned {
    pub value: StoreValue,
    pub version: u64,
    pub writer_tick: u64,
}

#[derive(Debug)]
struct Namespace {
    owner: String,
    entries: BTreeMap<String, Versioned>,
}

/// Frozen copy of the whole store, used for checkpoints.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StoreImage {
    namespaces: BTreeMap<String, (String, BTreeMap<String, Versioned>)>,
}

#[derive(Debug, Default)]
pub struct SharedStore {
    namespaces: RwLock<BTreeMap<String, Arc<RwLock<Namespace>>>>,
}

impl SharedStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `owner` as the only writer of `namespace`. Re-declaring with the
    /// same owner is a no-op.
    pub fn declare(&self, namespace: &str, owner: &str) -> Result<(), ExchangeError> {
        let mut map = self.namespaces.write().unwrap_or_else(|p| p.into_inner());
        if let Some(ns) = map.get(namespace) {
            let ns = ns.read().unwrap_or_else(|p| p.into_inner());
            if ns.owner != owner {
                return Err(ExchangeError::NotOwner {
                    namespace: namespace.to_owned(),
                    writer: owner.to_owned(),
                    owner: ns.owner.clone(),
                });
            }
            return Ok(());
        }
        map.insert(
            namespace.to_owned(),
            Arc::new(RwLock::new(Namespace {
                owner: owner.to_owned(),
                entries: BTreeMap::new(),
            })),
        );
        Ok(())
    }

    fn namespace(&self, namespace: &str) -> Result<Arc<RwLock<Namespace>>, ExchangeError> {
        self.namespaces
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(namespace)
            .cloned()
            .ok_or_else(|| ExchangeError::UnknownNamespace(namespace.to_owned()))
    }

    pub fn put(
        &self,
        writer: &str,
        namespace: &str,
        key: &str,
        value: StoreValue,
        tick: u64,
    ) -> Result<u64, ExchangeError> {
        let ns = self.namespace(namespace)?;
        let mut ns = ns.write().unwrap_or_else(|p| p.into_inner());
        if ns.owner != writer {
            return Err(ExchangeError::NotOwner {
                namespace: namespace.to_owned(),
                writer: writer.to_owned(),
                owner: ns.owner.clone(),
            });
        }
        let version = ns.entries.get(key).map_or(1, |e| e.version + 1);
        ns.entries.insert(
            key.to_owned(),
            Versioned {
                value,
                version,
                writer_tick: tick,
            },
        );
        Ok(version)
    }

    pub fn get(&self, namespace: &str, key: &str) -> Result<Versioned, ExchangeError> {
        let ns = self.namespace(namespace)?;
        let ns = ns.read().unwrap_or_else(|p| p.into_inner());
        ns.entries
            .get(key)
            .cloned()
            .ok_or_else(|| ExchangeError::KeyAbsent {
                namespace: namespace.to_owned(),
                key: key.to_owned(),
            })
    }

    pub fn image(&self) -> StoreImage {
        let map = self.namespaces.read().unwrap_or_else(|p| p.into_inner());
        let namespaces = map
            .iter()
            .map(|(name, ns)| {
                let ns = ns.read().unwrap_or_else(|p| p.into_inner());
                (name.clone(), (ns.owner.clone(), ns.entries.clone()))
            })
            .collect();
        StoreImage { namespaces }
    }

    /// Replaces the whole contents, versions included, with `image`.
    pub fn restore(&self, image: &StoreImage) {
        let mut map = self.namespaces.write().unwrap_or_else(|p| p.into_inner());
        *map = image
            .namespaces
            .iter()
            .map(|(name, (owner, entries))| {
                (
                    name.clone(),
                    Arc::new(RwLock::new(Namespace {
                        owner: owner.clone(),
                        entries: entries.clone(),
                    })),
                )
            })
            .collect();
    }
}
