//! Seedable, splittable counter-based streams.
//!
//! Every consumer draws from `ChaCha8` keyed by `(seed, stream)`, so a run's
//! numbers never depend on scheduling or on how many other runs exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer; used to derive stream ids from structured keys.
pub fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Stream id for wave vector `(k1, k2)` under a per-field salt.
pub fn mode_stream(salt: u64, k1: i64, k2: i64) -> u64 {
    mix(mix(salt ^ mix(k1 as u64)) ^ (k2 as u64))
}
