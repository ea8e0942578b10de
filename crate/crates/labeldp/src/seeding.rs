//! Deterministic random-stream derivation.
//!
//! Every randomized operation in this crate takes an explicit stream. Runs
//! are replayed from a single base seed by deriving one sub-seed per
//! (stage, row): stage 1 is prior estimation (a single stream for the whole
//! pass), stage 2 is per-row label randomization. Row streams are mutually
//! independent, which is what makes sharded privatization and the per-row
//! replay assertions in the tests possible.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Prior-estimation stage (one stream, row 0).
pub const STAGE_PRIOR: u64 = 1;
/// Label-randomization stage (one stream per row).
pub const STAGE_RANDOMIZE: u64 = 2;

/// Derives the sub-seed for `(stage, row)` from a base seed.
///
/// The stage is spread by a 64-bit odd constant so stages never collide on
/// small row indices; `seed_from_u64` then runs the result through SplitMix64,
/// so even adjacent row seeds yield uncorrelated streams.
pub fn stream_seed(base: u64, stage: u64, row: u64) -> u64 {
    base ^ stage.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ row
}

/// One deterministic stream for a derived seed.
pub fn make_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}
