//! Seed derivation.
//!
//! Every random component draws from its own ChaCha stream derived from a
//! root seed and a name, so toggling one component never shifts another's
//! draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a child seed from `root` and a substream `name`.
pub fn derive_seed(root: u64, name: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    h.update([0u8]);
    h.update(name.as_bytes());
    let out = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&out[..8]);
    u64::from_le_bytes(bytes)
}

/// Derive a child seed from `root`, a name and an index (per-trial streams).
pub fn derive_indexed(root: u64, name: &str, index: u64) -> u64 {
    derive_seed(derive_seed(root, name), &index.to_string())
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(root: u64, name: &str) -> ChaCha8Rng {
    rng_from(derive_seed(root, name))
}
