//! Deterministic random streams.
//!
//! Sample `i` of a run with master seed `s` draws from ChaCha8 keyed by
//! `seed_from_u64(s)` (rand_core's portable PCG32 expansion) on stream id
//! `i`. Streams of different samples never overlap, and adding samples
//! leaves the earlier ones untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(master_seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Seed for an independent family of streams, derived from a master seed
/// and a label (FNV-1a of the label, mixed with SplitMix64).
pub fn derive_seed(master_seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(master_seed ^ splitmix64(h))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
