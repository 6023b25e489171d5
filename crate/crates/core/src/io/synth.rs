//! Deterministic bag-of-words embedder.
//!
//! Text is lowercased and split on whitespace. Each distinct token `t` gets a
//! pseudo-Gaussian vector whose coordinate `j` is a pure function of
//! `h = fnv1a64(t) ^ seed` and `j`:
//!
//! ```text
//! a = splitmix64(h + (2j + 1) * 0x9E3779B97F4A7C15)
//! b = splitmix64(h + (2j + 2) * 0x9E3779B97F4A7C15)
//! u1 = ((a >> 11) + 1) / 2^53        in (0, 1]
//! u2 = (b >> 11) / 2^53              in [0, 1)
//! g  = sqrt(-2 ln u1) * cos(2 pi u2)
//! ```
//!
//! The document vector is the count-weighted sum of its token vectors, summed
//! in lexicographic token order, then L2-normalised. Text without tokens maps
//! to the zero vector. Shared tokens give correlated vectors, so lexical
//! overlap shows up as smaller Manhattan distance.

use std::collections::BTreeMap;

use crate::model::EmbeddingVector;
use crate::scalar::Scalar;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn gaussian(h: u64, j: usize) -> f64 {
    let j = j as u64;
    let a = splitmix64(h.wrapping_add((2 * j + 1).wrapping_mul(GOLDEN)));
    let b = splitmix64(h.wrapping_add((2 * j + 2).wrapping_mul(GOLDEN)));
    let scale = 1.0 / (1u64 << 53) as f64;
    let u1 = ((a >> 11) + 1) as f64 * scale;
    let u2 = (b >> 11) as f64 * scale;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn synth_embed<T: Scalar>(text: &str, dim: usize, seed: u64) -> EmbeddingVector<T> {
    let lowered = text.to_lowercase();
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for tok in lowered.split_whitespace() {
        *counts.entry(tok).or_default() += 1;
    }

    let mut acc = vec![0.0f64; dim];
    for (tok, count) in &counts {
        let h = fnv1a64(tok.as_bytes()) ^ seed;
        let w = f64::from(*count);
        for (j, a) in acc.iter_mut().enumerate() {
            *a += w * gaussian(h, j);
        }
    }

    let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return EmbeddingVector::zeros(dim);
    }
    EmbeddingVector::from_values_unchecked(acc.into_iter().map(|v| T::narrow(v / norm)).collect())
}
