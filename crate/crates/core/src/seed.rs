//! Deterministic seed derivation.
//!
//! Every random draw in the crate comes from a generator seeded with a value
//! derived from the master seed and the indices identifying the draw, so that
//! results do not depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed with one index into a new, well-spread seed.
pub fn mix(seed: u64, index: u64) -> u64 {
    splitmix(splitmix(seed) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Mixes a seed with a sequence of indices.
pub fn mix_all(seed: u64, indices: &[u64]) -> u64 {
    indices.iter().fold(seed, |s, &i| mix(s, i))
}

/// Generator used for every stochastic component.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
