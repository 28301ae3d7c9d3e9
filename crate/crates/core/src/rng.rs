//! Counter-based random substreams.
//!
//! Every random quantity in an experiment is drawn from a stream keyed by
//! `(master seed, key path)`, so results do not depend on how work is split
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a key path into a 64-bit stream id.
pub fn stream_id(keys: &[u64]) -> u64 {
    keys.iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

/// Independent generator for `(seed, keys)`.
pub fn substream(seed: u64, keys: &[u64]) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(keys));
    rng
}

/// Well-known stream domains, so that keys from different subsystems never collide.
pub mod domain {
    pub const DATASET: u64 = 1;
    pub const MC_POSITIVE: u64 = 2;
    pub const MC_NEGATIVE: u64 = 3;
    pub const MC_MARGINAL: u64 = 4;
    pub const HEATMAP: u64 = 5;
    pub const EXCESS: u64 = 6;
    pub const ORACLE: u64 = 7;
    pub const SUBSAMPLE: u64 = 8;
    pub const BERNSTEIN: u64 = 9;
    pub const TEST_SET: u64 = 10;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = substream(7, &[1, 2]).gen();
        let b: u64 = substream(7, &[1, 2]).gen();
        let c: u64 = substream(7, &[2, 1]).gen();
        let d: u64 = substream(8, &[1, 2]).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
