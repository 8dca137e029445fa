//! Reproducible random streams.
//!
//! A [`RandomStream`] names a ChaCha8 keystream by `(seed, stream_index)`.
//! ChaCha has 2⁶⁴ independent streams per key, so Monte Carlo work can be
//! split into shards that each own a stream, run on any number of threads,
//! and still reproduce the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        RandomStream { seed, stream_index }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Stream `k` of a family keyed by this stream.
    ///
    /// The family key mixes both fields, so substreams of `(s, i)` and
    /// `(s, j)` never collide for `i != j`.
    pub fn substream(&self, k: u64) -> RandomStream {
        RandomStream {
            seed: splitmix64(self.seed ^ splitmix64(self.stream_index.wrapping_add(0x5851_F42D))),
            stream_index: k,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
