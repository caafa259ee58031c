//! Seed streams.
//!
//! A master seed is split into independent per-purpose streams. The stream id is a
//! stable 64-bit mix of the master seed, a purpose tag and optional counters, so that
//! adding a consumer never perturbs the numbers drawn by another one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Derives the seed of the stream `(tag, counters)` under `master`.
pub fn stream_seed(master: u64, tag: &str, counters: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ splitmix64(fnv1a(tag)));
    for &c in counters {
        h = splitmix64(h ^ splitmix64(c.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    h
}

pub fn rng_from_seed(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_rng(master: u64, tag: &str, counters: &[u64]) -> StreamRng {
    rng_from_seed(stream_seed(master, tag, counters))
}
