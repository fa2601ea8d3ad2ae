use std::hash::Hasher;

use fnv::FnvHasher;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::KernelError;

/// Leading byte of every snapshot payload.
pub const SNAPSHOT_FORMAT: u8 = 1;

/// 64-bit FNV-1a (offset basis `0xcbf29ce484222325`, prime `0x100000001b3`).
///
/// Used for snapshot digests, RNG stream ids, config digests and trajectory digests.
pub fn digest64(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// Serialized submodel state pinned to a tick.
///
/// The payload is one format byte followed by the model's bincode-encoded state.
/// The kernel never looks inside.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub submodel_id: String,
    pub tick: u64,
    pub payload: Vec<u8>,
    pub digest: u64,
}

impl Snapshot {
    pub fn from_payload(submodel_id: impl Into<String>, tick: u64, payload: Vec<u8>) -> Self {
        let digest = digest64(&payload);
        Self {
            submodel_id: submodel_id.into(),
            tick,
            payload,
            digest,
        }
    }

    pub fn encode<S: Serialize + ?Sized>(
        submodel_id: &str,
        tick: u64,
        state: &S,
    ) -> Result<Self, KernelError> {
        let mut payload = vec![SNAPSHOT_FORMAT];
        bincode::serialize_into(&mut payload, state)
            .map_err(|e| KernelError::Codec(e.to_string()))?;
        Ok(Self::from_payload(submodel_id, tick, payload))
    }

    pub fn decode<S: DeserializeOwned>(&self, expected_id: &str) -> Result<S, KernelError> {
        if self.submodel_id != expected_id {
            return Err(KernelError::SnapshotIdMismatch {
                expected: expected_id.to_owned(),
                found: self.submodel_id.clone(),
            });
        }
        match self.payload.split_first() {
            Some((&SNAPSHOT_FORMAT, body)) => {
                bincode::deserialize(body).map_err(|e| KernelError::Codec(e.to_string()))
            }
            Some((&v, _)) => Err(KernelError::SnapshotFormat(v)),
            None => Err(KernelError::Codec("empty payload".into())),
        }
    }
}
