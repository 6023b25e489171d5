//! Shared domain types: embeddings, documents, corpora, queries, result lists
//! and relevance judgments. No algorithms live here.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fixed-length vector of finite coordinates. Serves both as a chromosome and
/// as a query representation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EmbeddingVector<T: Scalar> {
    values: Vec<T>,
}

impl<T: Scalar> EmbeddingVector<T> {
    /// Fails on an empty vector or any non-finite coordinate.
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("embedding must have dim >= 1".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "embedding coordinate {i} is not finite"
            )));
        }
        Ok(Self { values })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![T::zero(); dim],
        }
    }

    /// Used by the engines on vectors already known to be finite.
    pub(crate) fn from_values_unchecked(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn from_f64_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| T::narrow(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Bitwise equality (distinguishes `0.0` from `-0.0`).
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.bits() == b.bits())
    }

    pub fn cast<U: Scalar>(&self) -> EmbeddingVector<U> {
        EmbeddingVector {
            values: self.values.iter().map(|v| U::narrow(v.widen())).collect(),
        }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for EmbeddingVector<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let values = Vec::<T>::deserialize(deserializer)?;
        EmbeddingVector::new(values).map_err(serde::de::Error::custom)
    }
}

impl<T: Scalar> AsRef<[T]> for EmbeddingVector<T> {
    fn as_ref(&self) -> &[T] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Document<T: Scalar> {
    pub id: String,
    #[serde(default)]
    pub text: String,
    pub embedding: EmbeddingVector<T>,
}

impl<T: Scalar> Document<T> {
    pub fn new(id: impl Into<String>, text: impl Into<String>, embedding: EmbeddingVector<T>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            embedding,
        }
    }
}

/// An ordered document collection sharing one embedding dimension.
///
/// Construction through [`Corpus::from_parts`] performs no checks so that
/// malformed corpora can be inspected with [`validate_corpus`];
/// [`Corpus::try_new`] rejects them.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus<T: Scalar> {
    dim: usize,
    docs: Vec<Document<T>>,
}

impl<T: Scalar> Corpus<T> {
    pub fn from_parts(dim: usize, docs: Vec<Document<T>>) -> Self {
        Self { dim, docs }
    }

    pub fn try_new(dim: usize, docs: Vec<Document<T>>) -> Result<Self> {
        let corpus = Self::from_parts(dim, docs);
        match validate_corpus(&corpus).into_iter().next() {
            None => Ok(corpus),
            Some(v) => Err(v.into_error()),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn docs(&self) -> &[Document<T>] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Document<T>> {
        self.docs.iter().find(|d| d.id == id)
    }

    pub fn into_docs(self) -> Vec<Document<T>> {
        self.docs
    }

    /// Document indexes ordered by ascending id. This is the order in which
    /// the evolutionary engines lay out their initial population, so that
    /// index tie-breaks coincide with id tie-breaks.
    pub fn indexes_by_id(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.docs.len()).collect();
        idx.sort_by(|&a, &b| self.docs[a].id.cmp(&self.docs[b].id));
        idx
    }

    /// Checks the preconditions shared by every search operation.
    pub fn check_searchable(&self, query_dim: usize) -> Result<()> {
        if self.docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if query_dim != self.dim {
            return Err(Error::dim(self.dim, query_dim));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Query<T: Scalar> {
    pub id: String,
    #[serde(default)]
    pub text: String,
    pub embedding: EmbeddingVector<T>,
}

impl<T: Scalar> Query<T> {
    pub fn new(id: impl Into<String>, text: impl Into<String>, embedding: EmbeddingVector<T>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            embedding,
        }
    }
}

/// A corpus invariant that does not hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateId { id: String },
    DimensionMismatch { id: String, expected: usize, found: usize },
    NonFinite { id: String },
    ZeroDim,
}

impl Violation {
    fn into_error(self) -> Error {
        match self {
            Violation::DuplicateId { id } => Error::DuplicateId { id, line: None },
            Violation::DimensionMismatch {
                expected, found, ..
            } => Error::dim(expected, found),
            other => Error::InvalidArgument(other.to_string()),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId { id } => write!(f, "document {id:?}: duplicate id"),
            Violation::DimensionMismatch {
                id,
                expected,
                found,
            } => write!(
                f,
                "document {id:?}: embedding dim {found} does not match corpus dim {expected}"
            ),
            Violation::NonFinite { id } => write!(f, "document {id:?}: non-finite coordinate"),
            Violation::ZeroDim => write!(f, "corpus dim must be positive"),
        }
    }
}

/// Lists every violated corpus invariant; empty iff the corpus is well formed.
///
/// Emptiness is not a violation here; search operations reject it separately.
pub fn validate_corpus<T: Scalar>(corpus: &Corpus<T>) -> Vec<Violation> {
    let mut out = Vec::new();
    if corpus.dim == 0 {
        out.push(Violation::ZeroDim);
    }
    let mut seen = HashSet::with_capacity(corpus.docs.len());
    for doc in &corpus.docs {
        if !seen.insert(doc.id.as_str()) {
            out.push(Violation::DuplicateId { id: doc.id.clone() });
        }
        if doc.embedding.dim() != corpus.dim {
            out.push(Violation::DimensionMismatch {
                id: doc.id.clone(),
                expected: corpus.dim,
                found: doc.embedding.dim(),
            });
        }
        if !doc.embedding.is_finite() {
            out.push(Violation::NonFinite { id: doc.id.clone() });
        }
    }
    out
}

/// How a result list is ordered.
///
/// `Similarity` lists are sorted by ascending score. `Consensus` lists come
/// from rank aggregation: their order is the aggregate order and the score
/// column carries each document's own similarity, which need not be sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ListOrder {
    #[default]
    Similarity,
    Consensus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEntry {
    pub doc_id: String,
    pub score: f64,
    pub rank: usize,
}

/// Ordered top-N documents for one query. Lower score means more similar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultList {
    pub query_id: String,
    #[serde(default)]
    pub order: ListOrder,
    pub entries: Vec<ResultEntry>,
}

impl ResultList {
    /// Builds a list from `(doc_id, score)` pairs already in rank order.
    pub fn from_ranked(
        query_id: impl Into<String>,
        order: ListOrder,
        ranked: impl IntoIterator<Item = (String, f64)>,
    ) -> Self {
        let entries = ranked
            .into_iter()
            .enumerate()
            .map(|(i, (doc_id, score))| ResultEntry {
                doc_id,
                score,
                rank: i + 1,
            })
            .collect();
        Self {
            query_id: query_id.into(),
            order,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.doc_id.as_str())
    }

    pub fn truncated(mut self, n: usize) -> Self {
        self.entries.truncate(n);
        self
    }

    /// Human-readable descriptions of every broken list invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for (i, e) in self.entries.iter().enumerate() {
            if e.rank != i + 1 {
                out.push(format!("entry {i} has rank {} (expected {})", e.rank, i + 1));
            }
            if !seen.insert(e.doc_id.as_str()) {
                out.push(format!("doc {:?} appears more than once", e.doc_id));
            }
            if e.score.is_nan() {
                out.push(format!("doc {:?} has NaN score", e.doc_id));
            }
        }
        if self.order == ListOrder::Similarity {
            for w in self.entries.windows(2) {
                if w[1].score < w[0].score {
                    out.push(format!(
                        "score decreases from rank {} to rank {}",
                        w[0].rank, w[1].rank
                    ));
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.violations().is_empty()
    }
}

/// Binary relevance judgments; absent pairs are non-relevant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelevanceJudgments {
    by_query: BTreeMap<String, BTreeMap<String, u8>>,
}

impl RelevanceJudgments {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a judgment; `rel` must be 0 or 1. A later judgment for the same
    /// pair overwrites the earlier one.
    pub fn insert(&mut self, query_id: &str, doc_id: &str, rel: u8) -> Result<()> {
        if rel > 1 {
            return Err(Error::InvalidArgument(format!(
                "relevance must be 0 or 1, got {rel}"
            )));
        }
        self.by_query
            .entry(query_id.to_owned())
            .or_default()
            .insert(doc_id.to_owned(), rel);
        Ok(())
    }

    pub fn rel(&self, query_id: &str, doc_id: &str) -> u8 {
        self.by_query
            .get(query_id)
            .and_then(|m| m.get(doc_id))
            .copied()
            .unwrap_or(0)
    }

    pub fn is_relevant(&self, query_id: &str, doc_id: &str) -> bool {
        self.rel(query_id, doc_id) == 1
    }

    /// Total number of judged-relevant documents for the query.
    pub fn relevant_count(&self, query_id: &str) -> usize {
        self.by_query
            .get(query_id)
            .map_or(0, |m| m.values().filter(|&&r| r == 1).count())
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.by_query.keys().map(String::as_str)
    }

    pub fn contains_query(&self, query_id: &str) -> bool {
        self.by_query.contains_key(query_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(v: &[f32]) -> EmbeddingVector<f32> {
        EmbeddingVector::new(v.to_vec()).unwrap()
    }

    fn doc(id: &str, v: &[f32]) -> Document<f32> {
        Document::new(id, "", emb(v))
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(EmbeddingVector::new(vec![1.0f32, f32::NAN]).is_err());
        assert!(EmbeddingVector::new(vec![f64::INFINITY]).is_err());
        assert!(EmbeddingVector::<f32>::new(vec![]).is_err());
        assert!(serde_json::from_str::<EmbeddingVector<f32>>("[]").is_err());
    }

    #[test]
    fn duplicate_id_is_one_violation() {
        let c = Corpus::from_parts(2, vec![doc("q1", &[0., 1.]), doc("q1", &[1., 0.])]);
        assert_eq!(
            validate_corpus(&c),
            vec![Violation::DuplicateId { id: "q1".into() }]
        );
    }

    #[test]
    fn short_embedding_is_one_violation() {
        let ok = vec![0.0f32; 512];
        let short = vec![0.0f32; 511];
        let c = Corpus::from_parts(512, vec![doc("a", &ok), doc("b", &short)]);
        let v = validate_corpus(&c);
        assert_eq!(v.len(), 1);
        assert!(matches!(
            &v[0],
            Violation::DimensionMismatch { id, expected: 512, found: 511 } if id == "b"
        ));
    }

    #[test]
    fn well_formed_corpus_has_no_violations() {
        let c = Corpus::from_parts(
            2,
            vec![doc("a", &[0., 1.]), doc("b", &[1., 0.]), doc("c", &[1., 1.])],
        );
        assert!(validate_corpus(&c).is_empty());
        // read-only and idempotent
        assert_eq!(validate_corpus(&c), validate_corpus(&c));
        assert!(Corpus::try_new(2, c.docs().to_vec()).is_ok());
    }

    #[test]
    fn search_preconditions() {
        let empty = Corpus::<f32>::from_parts(3, vec![]);
        assert!(matches!(empty.check_searchable(3), Err(Error::EmptyCorpus)));
        let c = Corpus::from_parts(2, vec![doc("a", &[0., 1.])]);
        assert!(matches!(
            c.check_searchable(3),
            Err(Error::DimensionMismatch { expected: 2, found: 3, .. })
        ));
    }

    #[test]
    fn indexes_by_id_sorts_lexicographically() {
        let c = Corpus::from_parts(
            1,
            vec![doc("d10", &[0.]), doc("d2", &[0.]), doc("d1", &[0.])],
        );
        assert_eq!(c.indexes_by_id(), vec![2, 0, 1]);
    }

    #[test]
    fn result_list_invariants() {
        let ok = ResultList::from_ranked(
            "q",
            ListOrder::Similarity,
            vec![("a".into(), 0.1), ("b".into(), 0.1), ("c".into(), 0.4)],
        );
        assert!(ok.is_valid());

        let unsorted = ResultList::from_ranked(
            "q",
            ListOrder::Similarity,
            vec![("a".into(), 0.3), ("b".into(), 0.1)],
        );
        assert_eq!(unsorted.violations().len(), 1);
        let consensus = ResultList {
            order: ListOrder::Consensus,
            ..unsorted
        };
        assert!(consensus.is_valid());

        let mut dup = ok.clone();
        dup.entries[1].doc_id = "a".into();
        dup.entries[2].rank = 7;
        assert_eq!(dup.violations().len(), 2);
    }

    #[test]
    fn judgments_default_to_non_relevant() {
        let mut q = RelevanceJudgments::new();
        q.insert("q1", "d1", 1).unwrap();
        q.insert("q1", "d2", 0).unwrap();
        q.insert("q1", "d3", 1).unwrap();
        assert!(q.insert("q1", "d4", 2).is_err());
        assert_eq!(q.rel("q1", "d1"), 1);
        assert_eq!(q.rel("q1", "d2"), 0);
        assert_eq!(q.rel("q1", "zz"), 0);
        assert_eq!(q.rel("q9", "d1"), 0);
        assert_eq!(q.relevant_count("q1"), 2);
        assert_eq!(q.relevant_count("q9"), 0);
    }
}
