//! Seeded, splittable random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream identified by
//! `(seed, tags)`. Tags are counters (step index, element, batch index, ...)
//! so the stream a piece of work consumes never depends on which thread runs
//! it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a tag path into a 64-bit stream id.
pub fn stream_id(tags: &[u64]) -> u64 {
    tags.iter()
        .fold(0x243F_6A88_85A3_08D3, |h, &t| splitmix(h ^ splitmix(t)))
}

/// The stream for `(seed, tags)`.
pub fn stream(seed: u64, tags: &[u64]) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(tags));
    rng
}

/// Derives a child seed, e.g. one per sweep grid point.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    splitmix(seed ^ stream_id(tags))
}
