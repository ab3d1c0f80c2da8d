//! Seed derivation.
//!
//! Every random component draws from its own ChaCha8 stream whose seed is
//! the first eight bytes (little-endian) of `SHA-256(seed_le || name)`.
//! Parallel Monte-Carlo work is split into fixed-size chunks and each chunk
//! gets `derive_seed(seed, "<component>/<chunk index>")`, so results do not
//! depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

pub fn derive_seed(seed: u64, component: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(component.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn component_rng(seed: u64, component: &str) -> SimRng {
    SimRng::seed_from_u64(derive_seed(seed, component))
}

pub fn chunk_rng(seed: u64, component: &str, chunk: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(seed, &format!("{component}/{chunk}")))
}
