//! Seeding for reproducible Monte-Carlo trials.
//!
//! Every symbol vector comes from a `ChaCha8Rng` seeded through
//! `seed_from_u64`. Trial seeds are derived from `(base_seed, trial)` with a
//! SplitMix64 finalizer, so a trial's symbols depend only on its index and
//! never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const RNG_NAME: &str = "ChaCha8Rng(seed_from_u64); trial seed = splitmix64(base_seed + (trial+1)*0x9E3779B97F4A7C15)";

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` under `base_seed`.
pub fn trial_seed(base_seed: u64, trial: u64) -> u64 {
    splitmix64_mix(base_seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn symbol_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
