//! Seeding.
//!
//! Every stochastic component draws from [`RunRng`], a ChaCha8 stream seeded
//! from a single `u64`. Per-run seeds are derived with SplitMix64 finalisers so
//! that nearby `(base, cell, run)` triples give unrelated streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for run `run` of the sweep cell identified by `cell_key`.
pub fn derive_seed(base_seed: u64, cell_key: u64, run: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ cell_key) ^ run)
}
