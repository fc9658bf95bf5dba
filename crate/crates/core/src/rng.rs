//! Keyed random streams.
//!
//! Every sampler in this crate draws from a stream identified by
//! `(seed, key, round)` rather than from one shared generator. A document's
//! stream depends only on its own id, so the output is the same whatever
//! order documents are visited in and however they are split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Stable 64-bit FNV-1a hash. Unlike `DefaultHasher` its output is fixed
/// across Rust releases, which matters for reproducible runs.
pub fn stable_hash(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn mix(seed: u64, key: u64, round: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ key) ^ round)
}

pub fn stream(seed: u64, key: u64, round: u64) -> StreamRng {
    StreamRng::seed_from_u64(mix(seed, key, round))
}

pub fn doc_key(id: &str) -> u64 {
    stable_hash(id.as_bytes())
}
