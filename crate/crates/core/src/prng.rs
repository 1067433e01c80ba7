//! The counter-based generator behind every seeded table and expansion.
//!
//! Generator id `splitmix64-ctr-v1`: the `j`-th word for a seed is
//! `mix64(seed + (j + 1) * 0x9E3779B97F4A7C15)` (wrapping arithmetic), which
//! is exactly the `(j + 1)`-th output of SplitMix64 started from `seed`.
//! `mix64` is the SplitMix64 finaliser. Because each word depends only on
//! `(seed, j)`, any index can be produced directly, in any order.

pub const GENERATOR_ID: &str = "splitmix64-ctr-v1";

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn word(seed: u64, counter: u64) -> u64 {
    mix64(seed.wrapping_add(GAMMA.wrapping_mul(counter.wrapping_add(1))))
}

/// Seed of the `index`-th independent stream derived from `seed`.
#[inline]
pub fn substream(seed: u64, index: u64) -> u64 {
    word(seed, index)
}
