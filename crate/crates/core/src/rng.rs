//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha8 keyed by a `u64`
//! seed. Independent sub-streams (one per Haar sample, trial or grid point)
//! are selected with the ChaCha stream id, so results do not depend on the
//! order in which work items are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for `seed`, stream 0.
pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for work item `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}
