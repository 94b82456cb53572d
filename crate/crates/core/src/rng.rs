//! Seeded random streams.
//!
//! Every random consumer derives its generator from a 64-bit seed and a
//! stream index. Streams are ChaCha8 keystreams selected by
//! `set_stream`, so replica `i` of an ensemble sees the same numbers no
//! matter how replicas are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier written to metadata so reruns can pick the same generator.
pub const RNG_ALGORITHM: &str = "chacha8/rand_chacha-0.3/seed_from_u64+set_stream";

pub type StreamRng = ChaCha8Rng;

/// Stream reserved for topology generation.
pub const TOPOLOGY_STREAM: u64 = u64::MAX;
/// Stream reserved for edge-rate sampling.
pub const RATE_STREAM: u64 = u64::MAX - 1;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
