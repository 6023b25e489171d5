//! Binary-relevance IR metrics: precision at a cutoff, average precision and
//! its mean over queries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{RelevanceJudgments, ResultList};

/// Fraction of the first `n` ranks holding a relevant document. Missing ranks
/// beyond the list end count as non-relevant.
pub fn precision_at_n(result: &ResultList, qrels: &RelevanceJudgments, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("cutoff n must be positive".into()));
    }
    let hits = result
        .entries
        .iter()
        .filter(|e| e.rank <= n && qrels.is_relevant(&result.query_id, &e.doc_id))
        .count();
    Ok(hits as f64 / n as f64)
}

/// Sum of P@k over relevant ranks k, divided by the query's total number of
/// judged-relevant documents. Zero when the query has no relevant documents.
pub fn average_precision(result: &ResultList, qrels: &RelevanceJudgments) -> f64 {
    let total_relevant = qrels.relevant_count(&result.query_id);
    if total_relevant == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, e) in result.entries.iter().enumerate() {
        if qrels.is_relevant(&result.query_id, &e.doc_id) {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    sum / total_relevant as f64
}

pub fn mean_average_precision(aps: &[f64]) -> Result<f64> {
    if aps.is_empty() {
        return Err(Error::InvalidArgument(
            "mean average precision of no queries".into(),
        ));
    }
    Ok(aps.iter().sum::<f64>() / aps.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryEval {
    /// `(n, P@n)` for each requested cutoff.
    pub p_at_n: Vec<(usize, f64)>,
    pub ap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_query: BTreeMap<String, QueryEval>,
    pub map_value: f64,
    pub n_values: Vec<usize>,
    /// Queries whose judgments contain no relevant document (AP forced to 0).
    #[serde(default)]
    pub no_relevant: Vec<String>,
}

/// Scores every list at each cutoff. Lists are keyed by query id; a repeated
/// query id keeps the last list.
pub fn evaluate(
    results: &[ResultList],
    qrels: &RelevanceJudgments,
    n_values: &[usize],
) -> Result<EvalReport> {
    let mut per_query = BTreeMap::new();
    let mut no_relevant = Vec::new();
    for r in results {
        let p_at_n = n_values
            .iter()
            .map(|&n| Ok((n, precision_at_n(r, qrels, n)?)))
            .collect::<Result<Vec<_>>>()?;
        if qrels.relevant_count(&r.query_id) == 0 {
            log::debug!("query {:?} has no relevant documents; AP is 0", r.query_id);
            no_relevant.push(r.query_id.clone());
        }
        per_query.insert(
            r.query_id.clone(),
            QueryEval {
                p_at_n,
                ap: average_precision(r, qrels),
            },
        );
    }
    let aps: Vec<f64> = per_query.values().map(|q| q.ap).collect();
    no_relevant.sort();
    no_relevant.dedup();
    Ok(EvalReport {
        map_value: mean_average_precision(&aps)?,
        per_query,
        n_values: n_values.to_vec(),
        no_relevant,
    })
}
