//! Seed derivation and stateless uniform draws.
//!
//! Every random decision in the crate is a pure function of an episode seed
//! plus a stream key, so results never depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finaliser.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent child seed for `stream`.
pub fn derive(seed: u64, stream: u64) -> u64 {
    mix(mix(seed) ^ mix(stream.wrapping_mul(0x2545_f491_4f6c_dd1d)))
}

/// Seeded stream generator.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, stream))
}

/// Uniform draw in [0, 1) keyed by `(seed, t, slot)`.
pub fn unit(seed: u64, t: u64, slot: u64) -> f64 {
    let h = mix(derive(seed, t) ^ mix(slot.wrapping_add(0x632b_e59b_d9b4_e019)));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Named stream keys.
pub mod streams {
    pub const SCENE: u64 = 1;
    pub const GOAL: u64 = 10;
    pub const OBJECTS: u64 = 11;
    pub const CONTAINER: u64 = 12;
    pub const START: u64 = 13;
    pub const NAV_NOISE: u64 = 20;
    pub const RANDOM_CLOSENESS: u64 = 21;
    pub const RANDOM_EXPLORATION: u64 = 22;
    pub const SUITE: u64 = 30;
}
