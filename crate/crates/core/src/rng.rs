//! Seeded random streams.
//!
//! Every experiment draws from ChaCha8 generators keyed by a single `u64`
//! seed. Independent consumers use independent ChaCha streams: the 64-bit
//! stream id is `(purpose << 48) | replicate`, so adding draws for one
//! purpose never shifts the numbers seen by another, and replicate `r` of a
//! run always sees the same numbers regardless of how many threads execute
//! the ensemble.
//!
//! Uniform deviates are built from raw 64-bit words (`next_u64() >> 11`,
//! scaled by 2^-53) so the mapping from seed to value does not depend on
//! `rand` distribution internals.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Graph = 1,
    Prosociality = 2,
    Wealth = 3,
    Misc = 15,
}

/// ChaCha8 generator for `(seed, purpose, replicate)`.
pub fn stream(seed: u64, purpose: Purpose, replicate: u64) -> ChaCha8Rng {
    assert!(replicate < (1 << 48), "replicate index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) | replicate);
    rng
}

/// Uniform deviate in `[0, 1)` with 53 random bits.
pub fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform deviate in `[lo, hi)`.
pub fn uniform<R: RngCore>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit_f64(rng)
}
