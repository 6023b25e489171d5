//! Turning evolved populations into document result lists.
//!
//! Evolved chromosomes are generally not corpus members, so each one is
//! projected onto its nearest corpus document. A run yields one optimal list
//! (from the generation holding the best champion) plus suboptimal lists from
//! generations with the next-best distinct champion fitness values; these can
//! be combined with a positional Borda merge.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Corpus, EmbeddingVector, ListOrder, Query, ResultList};
use crate::scalar::Scalar;
use crate::similarity::{score_then_id, score_unchecked, SimilarityScore};
use crate::trace::RunTrace;

/// Members projected per parallel batch in [`resultset_from_population`].
const PROJECTION_BATCH: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarvestedResults {
    pub optimal: ResultList,
    pub suboptimal: Vec<ResultList>,
    /// Generation of `optimal` followed by the generation of each suboptimal
    /// list, in the same order.
    pub source_generations: Vec<usize>,
    /// Set when fewer than the requested number of suboptimal lists exist.
    pub fewer_suboptimal_than_requested: bool,
}

/// Nearest corpus document to `v` (ties by ascending id) and its distance.
pub fn project_to_document<T: Scalar>(
    v: &EmbeddingVector<T>,
    corpus: &Corpus<T>,
) -> Result<(String, SimilarityScore)> {
    corpus.check_searchable(v.dim())?;
    let i = nearest_index(v, corpus);
    Ok((
        corpus.docs()[i].id.clone(),
        score_unchecked(v, &corpus.docs()[i].embedding),
    ))
}

fn nearest_index<T: Scalar>(v: &EmbeddingVector<T>, corpus: &Corpus<T>) -> usize {
    let docs = corpus.docs();
    docs.par_iter()
        .enumerate()
        .map(|(i, d)| (score_unchecked(v, &d.embedding), i))
        .reduce_with(|a, b| {
            if score_then_id((b.0, &docs[b.1].id), (a.0, &docs[a.1].id)).is_lt() {
                b
            } else {
                a
            }
        })
        .map_or(0, |(_, i)| i)
}

fn nearest_index_serial<T: Scalar>(v: &EmbeddingVector<T>, corpus: &Corpus<T>) -> usize {
    let docs = corpus.docs();
    let mut best = (score_unchecked(v, &docs[0].embedding), 0usize);
    for (i, d) in docs.iter().enumerate().skip(1) {
        let s = score_unchecked(v, &d.embedding);
        if score_then_id((s, &d.id), (best.0, &docs[best.1].id)).is_lt() {
            best = (s, i);
        }
    }
    best.1
}

/// Ranked documents represented by a population.
///
/// Members are visited best-fitness first (ties by population index), each is
/// projected onto its nearest document, and the first `n` distinct documents
/// are kept. The kept documents are listed by their own query score (ties by
/// id), which is also the entry score.
pub fn resultset_from_population<T: Scalar>(
    population: &[EmbeddingVector<T>],
    query: &Query<T>,
    corpus: &Corpus<T>,
    n: usize,
) -> Result<ResultList> {
    if population.is_empty() {
        return Err(Error::InvalidArgument("population is empty".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    corpus.check_searchable(query.embedding.dim())?;
    if let Some(bad) = population.iter().find(|v| v.dim() != corpus.dim()) {
        return Err(Error::dim(corpus.dim(), bad.dim()));
    }

    let q = &query.embedding;
    let fitness: Vec<SimilarityScore> = population
        .par_iter()
        .map(|v| score_unchecked(v, q))
        .collect();
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));

    // Projection results keyed by bit pattern; converged populations repeat
    // the same chromosome many times.
    let mut cache: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut picked: Vec<usize> = Vec::with_capacity(n);
    let mut seen = HashSet::new();

    'outer: for batch in order.chunks(PROJECTION_BATCH) {
        let keys: Vec<Vec<u64>> = batch
            .iter()
            .map(|&m| population[m].as_slice().iter().map(|x| x.bits()).collect())
            .collect();
        let todo: Vec<usize> = (0..batch.len())
            .filter(|&k| !cache.contains_key(&keys[k]))
            .collect();
        let projected: Vec<usize> = todo
            .par_iter()
            .map(|&k| nearest_index_serial(&population[batch[k]], corpus))
            .collect();
        for (k, doc) in todo.into_iter().zip(projected) {
            cache.insert(keys[k].clone(), doc);
        }
        for key in &keys {
            let doc = cache[key];
            if seen.insert(doc) {
                picked.push(doc);
                if picked.len() == n {
                    break 'outer;
                }
            }
        }
    }

    let docs = corpus.docs();
    let mut scored: Vec<(SimilarityScore, usize)> = picked
        .into_iter()
        .map(|i| (score_unchecked(&docs[i].embedding, q), i))
        .collect();
    scored.sort_by(|a, b| score_then_id((a.0, &docs[a.1].id), (b.0, &docs[b.1].id)));

    let list = ResultList::from_ranked(
        query.id.clone(),
        ListOrder::Similarity,
        scored.into_iter().map(|(s, i)| (docs[i].id.clone(), s.value())),
    );
    debug_assert!(list.is_valid(), "{:?}", list.violations());
    Ok(list)
}

/// Picks the generations to harvest: the earliest generation holding the best
/// champion fitness, then the earliest generation for each of the next `s`
/// best distinct champion fitness values.
pub fn harvest_generations(champion_fitness: &[SimilarityScore], s: usize) -> Vec<usize> {
    let mut first_seen: BTreeMap<u64, usize> = BTreeMap::new();
    for (g, f) in champion_fitness.iter().enumerate() {
        // Non-negative finite floats order like their bit patterns.
        first_seen.entry(f.value().to_bits()).or_insert(g);
    }
    first_seen.into_values().take(s + 1).collect()
}

pub fn harvest_resultsets<T: Scalar>(
    trace: &RunTrace<T>,
    query: &Query<T>,
    corpus: &Corpus<T>,
    n: usize,
    s: usize,
) -> Result<HarvestedResults> {
    if trace.generations.is_empty() {
        return Err(Error::InvalidArgument("trace has no generations".into()));
    }
    let gens = harvest_generations(&trace.champion_fitnesses(), s);
    let mut lists = gens
        .iter()
        .map(|&g| resultset_from_population(&trace.generations[g].population, query, corpus, n))
        .collect::<Result<Vec<_>>>()?;
    let suboptimal = lists.split_off(1);
    Ok(HarvestedResults {
        optimal: lists.pop().expect("at least one generation"),
        fewer_suboptimal_than_requested: suboptimal.len() < s,
        suboptimal,
        source_generations: gens,
    })
}

/// Positional Borda merge.
///
/// A document at rank `r <= n` in a list earns `n - r + 1` points. Documents
/// are ordered by total points (descending), then by their best score across
/// lists, then by id; the entry score is that best score.
pub fn merge_resultsets(lists: &[ResultList], n: usize) -> Result<ResultList> {
    let first = lists
        .first()
        .ok_or_else(|| Error::InvalidArgument("no result lists to merge".into()))?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if let Some(other) = lists.iter().find(|l| l.query_id != first.query_id) {
        return Err(Error::InvalidArgument(format!(
            "cannot merge lists for queries {:?} and {:?}",
            first.query_id, other.query_id
        )));
    }

    let mut tally: HashMap<&str, (usize, f64)> = HashMap::new();
    for list in lists {
        for e in &list.entries {
            let points = (n + 1).saturating_sub(e.rank);
            let slot = tally.entry(&e.doc_id).or_insert((0, f64::INFINITY));
            slot.0 += points;
            if e.score < slot.1 {
                slot.1 = e.score;
            }
        }
    }

    let mut merged: Vec<(&str, usize, f64)> =
        tally.into_iter().map(|(id, (p, s))| (id, p, s)).collect();
    merged.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then_with(|| a.2.total_cmp(&b.2))
            .then_with(|| a.0.cmp(b.0))
    });
    merged.truncate(n);

    let list = ResultList::from_ranked(
        first.query_id.clone(),
        ListOrder::Consensus,
        merged.into_iter().map(|(id, _, s)| (id.to_owned(), s)),
    );
    debug_assert!(list.is_valid(), "{:?}", list.violations());
    Ok(list)
}
