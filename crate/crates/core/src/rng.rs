//! Reproducible, partitionable random streams.
//!
//! A stream is a ChaCha8 generator keyed by the master seed with the stream
//! index used as the ChaCha nonce. Distinct indices therefore select disjoint
//! keystreams, and trial `j` of any experiment can be replayed in isolation.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream indices at or above this value are reserved for auxiliary draws
/// (Monte Carlo reference sets, random probe vectors). Trials use `0..`.
pub const AUXILIARY_STREAM_BASE: u64 = 1 << 63;
/// Frozen sample set behind Monte Carlo averaged propagators.
pub const PROPAGATOR_STREAM: u64 = AUXILIARY_STREAM_BASE;
/// Random probe vectors.
pub const PROBE_STREAM: u64 = AUXILIARY_STREAM_BASE + 1;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_index);
        Self {
            seed,
            stream_index,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// A fresh stream with the same seed and a different index.
    pub fn sibling(&self, stream_index: u64) -> Self {
        Self::new(self.seed, stream_index)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
