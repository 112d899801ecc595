//! Seed derivation for stage-local random generators.
//!
//! A run has exactly one master seed. Each stage derives its own seed as
//! `splitmix64(master ^ fnv1a64(stage_name))`, so any stage can be re-run in
//! isolation and still see the same random stream. Generators are ChaCha8,
//! whose output is specified independently of platform and word size.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stage_seed(master: u64, stage: &str) -> u64 {
    splitmix64(master ^ fnv1a64(stage.as_bytes()))
}

pub fn generator(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
