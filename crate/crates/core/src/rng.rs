//! Keyed random streams.
//!
//! Every random task (a sampled topology, a simulation replication, a probe
//! draw) gets its own generator derived from the master seed and a path of
//! integer keys. Results therefore do not depend on how tasks are scheduled
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

/// Generator for the stream identified by `(seed, keys...)`.
pub fn stream(seed: u64, keys: &[u64]) -> StreamRng {
    let mut hasher = Sha256::new();
    hasher.update(b"spatial-aoi/stream");
    hasher.update(seed.to_le_bytes());
    for k in keys {
        hasher.update(k.to_le_bytes());
    }
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Domain tags keep streams of different experiment kinds disjoint.
pub mod domain {
    pub const TOPOLOGY: u64 = 1;
    pub const SIMULATION: u64 = 2;
    pub const CONVEXITY: u64 = 3;
    pub const PROBE: u64 = 4;
    pub const INSTANCE: u64 = 5;
}
