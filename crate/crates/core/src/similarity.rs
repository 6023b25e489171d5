//! Fitness function and the exhaustive baseline ranker.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Corpus, EmbeddingVector, ListOrder, Query, ResultList};
use crate::scalar::Scalar;

/// Mean absolute coordinate difference between two embeddings. Lower is more
/// similar; zero iff the vectors are identical.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub const ZERO: SimilarityScore = SimilarityScore(0.0);
    /// Assigned to chromosomes that left the finite domain.
    pub const WORST: SimilarityScore = SimilarityScore(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "similarity score must be non-negative, got {value}"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Total order; `WORST` sorts last.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for SimilarityScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Mean of `|a[i] - b[i]|`, accumulated in `f64`. Callers guarantee equal,
/// non-zero lengths.
#[inline]
pub(crate) fn mean_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x.widen() - y.widen()).abs())
        .sum();
    sum / a.len() as f64
}

/// Fitness of `x2` relative to `x1` (or vice versa; it is symmetric).
pub fn manhattan_similarity<T: Scalar>(
    x1: &EmbeddingVector<T>,
    x2: &EmbeddingVector<T>,
) -> Result<SimilarityScore> {
    if x1.dim() != x2.dim() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: {} vs {}",
            x1.dim(),
            x2.dim()
        )));
    }
    Ok(score_unchecked(x1, x2))
}

#[inline]
pub(crate) fn score_unchecked<T: Scalar>(
    x1: &EmbeddingVector<T>,
    x2: &EmbeddingVector<T>,
) -> SimilarityScore {
    score_unchecked_slice(x1.as_slice(), x2.as_slice())
}

/// Orders `(score, id)` pairs ascending by score, then by id.
#[inline]
pub(crate) fn score_then_id(a: (SimilarityScore, &str), b: (SimilarityScore, &str)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1))
}

/// Scores every document against the query and returns the `n` best,
/// ascending by score with ties broken by ascending document id.
///
/// Scoring runs on the current rayon pool; the result does not depend on the
/// number of threads.
pub fn rank_exhaustive<T: Scalar>(
    query: &Query<T>,
    corpus: &Corpus<T>,
    n: usize,
) -> Result<ResultList> {
    corpus.check_searchable(query.embedding.dim())?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let q = query.embedding.as_slice();
    let mut scored: Vec<(SimilarityScore, usize)> = corpus
        .docs()
        .par_iter()
        .enumerate()
        .map(|(i, d)| (score_unchecked_slice(q, d.embedding.as_slice()), i))
        .collect();

    let docs = corpus.docs();
    let cmp = |a: &(SimilarityScore, usize), b: &(SimilarityScore, usize)| {
        score_then_id((a.0, &docs[a.1].id), (b.0, &docs[b.1].id))
    };
    let n = n.min(scored.len());
    if n < scored.len() {
        scored.select_nth_unstable_by(n - 1, cmp);
        scored.truncate(n);
    }
    scored.sort_unstable_by(cmp);

    let list = ResultList::from_ranked(
        query.id.clone(),
        ListOrder::Similarity,
        scored
            .into_iter()
            .map(|(s, i)| (docs[i].id.clone(), s.value())),
    );
    debug_assert!(list.is_valid(), "{:?}", list.violations());
    Ok(list)
}

#[inline]
fn score_unchecked_slice<T: Scalar>(a: &[T], b: &[T]) -> SimilarityScore {
    let v = mean_abs_diff(a, b);
    if v.is_finite() {
        SimilarityScore(v)
    } else {
        SimilarityScore::WORST
    }
}
