//! Counter-based random streams.
//!
//! Every submodel draws from its own ChaCha8 stream keyed by the run seed and a
//! stream id derived from the submodel id. A stream's position is a plain
//! counter, so draws never depend on how other streams were scheduled and the
//! whole generator state fits in a snapshot.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::kernel::digest64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Stream keyed by a submodel identifier.
    pub fn for_id(seed: u64, id: &str) -> Self {
        Self::new(seed, stream_id(id))
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn stream(&self) -> u64 {
        self.inner.get_stream()
    }

    pub fn position(&self) -> u128 {
        self.inner.get_word_pos()
    }
}

pub fn stream_id(id: &str) -> u64 {
    digest64(id.as_bytes())
}
