//! Seed derivation for independent replicates.
//!
//! Every replicate of every sweep point draws from its own generator seeded
//! with [`mix64`], so results do not depend on the order in which a worker
//! pool schedules them.

use rand::SeedableRng;

/// Generator used throughout the simulator.
pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// SplitMix64 output function.
#[inline]
pub const fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Replicate seed: `splitmix64(splitmix64(splitmix64(base) ^ axis) ^ replicate)`.
pub const fn mix64(base_seed: u64, axis_index: u64, replicate_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ axis_index) ^ replicate_index)
}
