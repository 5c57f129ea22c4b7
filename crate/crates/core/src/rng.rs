//! Seeded generators. Every random draw in the crate goes through here so a
//! run is reproducible from its seed alone.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

pub type Rng = SplitMix64;

pub fn seeded(seed: u64) -> Rng {
    SplitMix64::seed_from_u64(seed)
}

/// Derives an independent stream for `(seed, stream)`, e.g. one per epoch.
pub fn derived(seed: u64, stream: u64) -> Rng {
    // golden-ratio offset keeps (s, 0) distinct from seeded(s)
    seeded(seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// A fresh seed for sub-stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    derived(seed, stream).next_u64()
}
