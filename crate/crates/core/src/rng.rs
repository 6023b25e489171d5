//! Seeded random streams used by the engines.
//!
//! All integer draws go through `u64` ranges so that the sequence of values
//! does not depend on the platform's pointer width.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type EngineRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> EngineRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for one (generation, individual) cell of a run.
pub fn cell_stream(seed: u64, generation: usize, index: usize) -> EngineRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | (index as u64 & 0xffff_ffff));
    rng
}

/// Uniform index in `[0, n)`.
#[inline]
pub fn index_below<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    rng.gen_range(0..n as u64) as usize
}

/// Uniform index in `[lo, hi)`.
#[inline]
pub fn index_in<R: Rng + ?Sized>(rng: &mut R, lo: usize, hi: usize) -> usize {
    rng.gen_range(lo as u64..hi as u64) as usize
}
