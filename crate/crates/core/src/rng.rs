//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! seeded from an explicit `u64`, so results never depend on wall-clock state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `seed` and a stream label.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix64(mix64(seed) ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream labels used to partition seeds between roles.
pub mod stream {
    pub const TRAIN_DATA: u64 = 1;
    pub const HELDOUT_DATA: u64 = 2;
    pub const ALLOC_INIT: u64 = 3;
    pub const PAY_INIT: u64 = 4;
    pub const BATCHES: u64 = 5;
    pub const MISREPORTS: u64 = 6;
    pub const EVAL_MISREPORTS: u64 = 7;
}
