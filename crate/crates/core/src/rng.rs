//! Seeded random streams.
//!
//! Every random quantity comes from a ChaCha8 generator keyed by a 64-bit
//! seed plus a stream number, so the scenario, the channel and the random
//! baseline of one trial draw from independent sequences of the same seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream used by scenario generation.
pub const SCENARIO_STREAM: u64 = 0;
/// Stream used for shadow-fading draws.
pub const CHANNEL_STREAM: u64 = 1;
/// Stream used by the random-matching baseline.
pub const BASELINE_STREAM: u64 = 2;

pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` of sweep point `point`.
///
/// The counter `point << 32 | trial` is hashed and combined with the master
/// seed, then hashed again. A trial's seed depends only on its own
/// coordinates, so adding trials or points never changes existing ones.
pub fn trial_seed(master_seed: u64, point: u32, trial: u32) -> u64 {
    let counter = ((point as u64) << 32) | trial as u64;
    splitmix64(master_seed ^ splitmix64(counter))
}
