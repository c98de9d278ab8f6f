//! Per-stage seed derivation.
//!
//! `stage_seed(master, name) = splitmix64(master ^ fnv1a(name))`, so every
//! stage gets an independent stream and overriding one stage's seed leaves
//! the others untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hashing::fnv1a;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn stage_seed(master: u64, stage: &str) -> u64 {
    splitmix64(master ^ fnv1a(stage.as_bytes()))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
