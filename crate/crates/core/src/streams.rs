//! Reproducible random streams.
//!
//! Every Monte-Carlo sample draws from its own ChaCha stream selected by a
//! `(master seed, sample index)` pair, so results do not depend on how work
//! is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Identifies the random stream a sample was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master: u64,
    pub stream: u64,
}

impl SeedRecord {
    pub fn new(master: u64, stream: u64) -> Self {
        SeedRecord { master, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        stream_rng(self.master, self.stream)
    }
}

/// Generator for sample `stream` under `master`.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Derive an unrelated master seed for a secondary family of samples.
pub fn derive_master(master: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = master ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
