//! Seeded random streams. Every chain and every replicate owns its own stream;
//! there is no global generator.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Identifier of the generator algorithm, recorded in every output.
pub const GENERATOR_ID: &str = "ChaCha20";

/// Stream used for data generation within a replicate.
pub const DATA_STREAM: u64 = 0;
/// Stream used for the MCMC chain within a replicate.
pub const CHAIN_STREAM: u64 = 1;

pub type StreamRng = ChaCha20Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer.
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `r`: the base seed XOR a 64-bit mix of the index.
pub fn replicate_seed(base: u64, r: u64) -> u64 {
    base ^ mix64(r)
}
