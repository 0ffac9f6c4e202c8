//! Seeded random streams.
//!
//! Every simulation threads a single [`SimRng`] explicitly. Trials of an
//! experiment get their own stream forked from the master seed by trial
//! index, so running trials in parallel gives the same numbers as running
//! them one after another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for trial `index` under `master`.
pub fn fork(master: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index.wrapping_add(1));
    rng
}
