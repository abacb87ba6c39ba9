//! Seeded, splittable random streams.
//!
//! Every stochastic routine takes an explicit generator. Parallel work derives
//! one independent stream per task from a `(seed, stream)` pair so results do
//! not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream ids used by the library, kept apart so that e.g. tree `i` and
/// query `i` never share a generator.
pub(crate) mod streams {
    pub const TREE: u64 = 0;
    pub const QUERY: u64 = 1 << 40;
    pub const GENERATOR: u64 = 2 << 40;
    pub const PLANES: u64 = 4 << 40;
    pub const MONTE_CARLO: u64 = 5 << 40;
}
