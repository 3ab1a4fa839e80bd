//! Seeded, counter-derived random number streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the crate. ChaCha output is platform independent.
pub type BvmRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> BvmRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from `master_seed`.
///
/// Streams share the key and differ only in the ChaCha stream id, so results
/// for a given `(master_seed, index)` never depend on scheduling.
pub fn stream(master_seed: u64, index: u64) -> BvmRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
