//! Reproducible random streams.
//!
//! Every sampler takes an explicit [`RngStream`]. A stream is a ChaCha8
//! keystream selected by `(seed, stream_id)`: the seed fixes the key, the
//! stream id selects one of 2^64 independent keystreams. Replica `i` of an
//! experiment uses `stream(i)`, so results do not depend on how replicas are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Child stream: a deterministic function of this stream and `index`.
    ///
    /// Used to fan a single stream out into per-replica or per-purpose
    /// streams. For a fixed stream, distinct indices give distinct ids.
    pub fn substream(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: splitmix64(
                self.stream_id ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)),
            ),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Runs `f(i, rng_i)` for `i in 0..count` in parallel, where `rng_i` comes
/// from `stream.substream(i)`. Results are returned in index order.
pub fn par_replicas<T, F>(count: u64, stream: &RngStream, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync + Send,
{
    (0..count)
        .into_par_iter()
        .map(|i| f(i, &mut stream.substream(i).rng()))
        .collect()
}

/// Like [`par_replicas`], with per-worker scratch state built by `init`.
/// The scratch state must not influence results.
pub fn par_replicas_with<S, T, I, F>(count: u64, stream: &RngStream, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64, &mut ChaCha8Rng) -> T + Sync + Send,
{
    (0..count)
        .into_par_iter()
        .map_init(init, |state, i| f(state, i, &mut stream.substream(i).rng()))
        .collect()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
