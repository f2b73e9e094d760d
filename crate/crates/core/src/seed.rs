//! Labeled sub-seed derivation from a master seed.
//!
//! Each randomness source (initial conditions, observation coefficients,
//! noise, landscape) gets its own stream so that changing one never perturbs
//! the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const INITIAL_CONDITIONS: &str = "initial-conditions";
pub const OBSERVATION: &str = "observation";
pub const NOISE: &str = "noise";
pub const LANDSCAPE: &str = "landscape";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the sub-seed for `label` from `master`. Stable across platforms
/// and releases.
pub fn derive(master: u64, label: &str) -> u64 {
    // FNV-1a over the label bytes
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(splitmix64(master) ^ h)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
