//! Purpose-keyed RNG substreams.
//!
//! Every stochastic component draws from its own stream derived from
//! `(master seed, label)`. Changing how many draws one component makes can
//! never perturb another — e.g. training for more epochs does not shift
//! which samples the memory keeps.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Deterministic, platform-independent RNG for the given seed and purpose
/// label. Labels are free-form; by convention they look like
/// `"shuffle/task3"` or `"cscore/subset/0"`.
pub fn stream(seed: u64, label: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}
