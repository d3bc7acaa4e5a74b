//! Deterministic random-stream derivation.
//!
//! A single root seed expands into independent named streams so that
//! components never share RNG state. Stream names used across the crate:
//!
//! | stream name          | owner                                   |
//! |----------------------|-----------------------------------------|
//! | `data`               | procedural clip generation              |
//! | `init/<net>`         | network parameter init (one per net)    |
//! | `env/<i>`            | environment instance `i` (resets + policy sampling) |
//! | `shuffle`            | minibatch index shuffling               |
//! | `distill/eps`        | reparameterization noise in updates     |
//! | `eval`               | evaluation-time sampling                |
//! | `generate/<i>`       | generative rollout seed `i`             |
//!
//! Derivation is `SHA-256(root_seed_le || name)` truncated to a ChaCha8 key,
//! so streams are stable across platforms and insensitive to call order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive the named stream for `root_seed`.
pub fn stream(root_seed: u64, name: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(root_seed.to_le_bytes());
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

/// Convenience for indexed stream families (`env/0`, `env/1`, ...).
pub fn indexed_stream(root_seed: u64, family: &str, index: usize) -> ChaCha8Rng {
    stream(root_seed, &format!("{family}/{index}"))
}
