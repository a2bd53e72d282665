//! Seeded randomness. Every random choice in a session derives from a
//! per-party 64-bit seed through a ChaCha20 keystream, so a run can be
//! replayed bit for bit from the seeds recorded in its session config.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// The generator used throughout the crate.
pub type Prg = ChaCha20Rng;

/// Generator keyed directly by a 64-bit seed.
pub fn seeded(seed: u64) -> Prg {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Domain-separated generator: the key is `SHA-256(label ∥ seed)`.
pub fn derive(label: &str, seed: &[u8]) -> Prg {
    let mut h = Sha256::new();
    h.update((label.len() as u32).to_le_bytes());
    h.update(label.as_bytes());
    h.update(seed);
    ChaCha20Rng::from_seed(h.finalize().into())
}
