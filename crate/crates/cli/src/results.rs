//! The results document written by `search` and `compare`, and the pipeline
//! that produces it.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use evoretrieve::assembly::{harvest_resultsets, merge_resultsets};
use evoretrieve::de::de_run;
use evoretrieve::ga::ga_run;
use evoretrieve::io::synth_embed;
use evoretrieve::{
    rank_exhaustive, Algorithm, Corpus32, EngineConfig, ListOrder, Query32, ResultList,
};
use serde::{Deserialize, Serialize};

use crate::args::EngineArgs;
use crate::error::{CliError, CliResult};

pub const SCHEMA: &str = "evoretrieve-results/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryInfo {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusInfo {
    pub size: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryDoc {
    pub rank: usize,
    pub doc_id: String,
    pub score: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSetDoc {
    pub query_id: String,
    pub order: ListOrder,
    /// Generation the list was harvested from (GA/DE only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generation: Option<usize>,
    pub entries: Vec<EntryDoc>,
}

impl ResultSetDoc {
    fn from_list(list: &ResultList, generation: Option<usize>, texts: &HashMap<&str, &str>) -> Self {
        Self {
            query_id: list.query_id.clone(),
            order: list.order,
            generation,
            entries: list
                .entries
                .iter()
                .map(|e| EntryDoc {
                    rank: e.rank,
                    doc_id: e.doc_id.clone(),
                    score: e.score,
                    text: texts.get(e.doc_id.as_str()).copied().unwrap_or("").to_owned(),
                })
                .collect(),
        }
    }

    pub fn to_result_list(&self) -> ResultList {
        ResultList {
            query_id: self.query_id.clone(),
            order: self.order,
            entries: self
                .entries
                .iter()
                .map(|e| evoretrieve::ResultEntry {
                    doc_id: e.doc_id.clone(),
                    score: e.score,
                    rank: e.rank,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSets {
    pub optimal: ResultSetDoc,
    pub suboptimal: Vec<ResultSetDoc>,
    pub merged: Option<ResultSetDoc>,
}

impl ResultSets {
    /// `(kind label, list)` pairs: `optimal`, `suboptimal_1`, ..., `merged`.
    pub fn labelled(&self) -> Vec<(String, &ResultSetDoc)> {
        let mut out = vec![("optimal".to_owned(), &self.optimal)];
        for (k, s) in self.suboptimal.iter().enumerate() {
            out.push((format!("suboptimal_{}", k + 1), s));
        }
        if let Some(m) = &self.merged {
            out.push(("merged".to_owned(), m));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub generations_run: usize,
    pub initial_champion_fitness: f64,
    pub final_champion_fitness: f64,
    pub fewer_suboptimal_than_requested: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub search_ms: f64,
    pub assemble_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub schema: String,
    pub query: QueryInfo,
    pub algorithm: Algorithm,
    pub config: EngineConfig,
    pub seed: u64,
    pub top_n: usize,
    pub corpus: CorpusInfo,
    pub resultsets: ResultSets,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub run: Option<RunSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing_ms: Option<Timing>,
}

impl ResultsDocument {
    pub fn to_json(&self) -> CliResult<String> {
        pretty_json(self)
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn pretty_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Runs one algorithm for one query and assembles its results document.
pub fn run_search(
    corpus: &Corpus32,
    query: &Query32,
    algorithm: Algorithm,
    seed: u64,
    engine: &EngineArgs,
    with_timing: bool,
) -> CliResult<ResultsDocument> {
    let n = engine.top_n;
    if n == 0 {
        return Err(CliError::Usage("--top-n must be positive".into()));
    }
    let texts: HashMap<&str, &str> = corpus
        .docs()
        .iter()
        .map(|d| (d.id.as_str(), d.text.as_str()))
        .collect();

    let t0 = Instant::now();
    let (config, resultsets, run, search_ms, assemble_ms) = match algorithm {
        Algorithm::Baseline => {
            let list = rank_exhaustive(query, corpus, n)?;
            let search = ms(t0);
            let sets = ResultSets {
                optimal: ResultSetDoc::from_list(&list, None, &texts),
                suboptimal: Vec::new(),
                merged: None,
            };
            (EngineConfig::Baseline, sets, None, search, 0.0)
        }
        Algorithm::Ga | Algorithm::De => {
            let trace = if algorithm == Algorithm::Ga {
                ga_run(corpus, query, &engine.ga_config(seed))?
            } else {
                de_run(corpus, query, &engine.de_config(seed))?
            };
            let search = ms(t0);
            let t1 = Instant::now();
            let harvested = harvest_resultsets(&trace, query, corpus, n, engine.suboptimal)?;
            let mut all = vec![harvested.optimal.clone()];
            all.extend(harvested.suboptimal.iter().cloned());
            let merged = merge_resultsets(&all, n)?;
            let gens = &harvested.source_generations;
            let sets = ResultSets {
                optimal: ResultSetDoc::from_list(&harvested.optimal, Some(gens[0]), &texts),
                suboptimal: harvested
                    .suboptimal
                    .iter()
                    .zip(&gens[1..])
                    .map(|(l, &g)| ResultSetDoc::from_list(l, Some(g), &texts))
                    .collect(),
                merged: Some(ResultSetDoc::from_list(&merged, None, &texts)),
            };
            let run = RunSummary {
                generations_run: trace.generations.len() - 1,
                initial_champion_fitness: trace.generations[0].champion_fitness.value(),
                final_champion_fitness: trace
                    .final_champion_fitness()
                    .map_or(f64::NAN, |f| f.value()),
                fewer_suboptimal_than_requested: harvested.fewer_suboptimal_than_requested,
            };
            (trace.config, sets, Some(run), search, ms(t1))
        }
    };

    for (label, set) in resultsets.labelled() {
        let violations = set.to_result_list().violations();
        if !violations.is_empty() {
            return Err(CliError::Internal(format!(
                "{label} resultset breaks list invariants: {violations:?}"
            )));
        }
    }

    Ok(ResultsDocument {
        schema: SCHEMA.to_owned(),
        query: QueryInfo {
            id: query.id.clone(),
            text: query.text.clone(),
        },
        algorithm,
        config,
        seed,
        top_n: n,
        corpus: CorpusInfo {
            size: corpus.len(),
            dim: corpus.dim(),
        },
        resultsets,
        run,
        timing_ms: with_timing.then_some(Timing {
            search_ms,
            assemble_ms,
        }),
    })
}

/// Embedding recipe stored next to an index built with `ingest --synth`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthRecipe {
    pub dim: usize,
    pub seed: u64,
}

impl SynthRecipe {
    pub fn sidecar_path(index: &Path) -> PathBuf {
        let mut p = index.as_os_str().to_owned();
        p.push(".synth.json");
        PathBuf::from(p)
    }

    pub fn load(index: &Path) -> CliResult<Option<Self>> {
        let path = Self::sidecar_path(index);
        match std::fs::read_to_string(&path) {
            Ok(s) => Ok(Some(serde_json::from_str(&s).map_err(|e| {
                CliError::data(format!("{}: {e}", path.display()))
            })?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(CliError::data(format!("{}: {e}", path.display()))),
        }
    }

    pub fn save(&self, index: &Path) -> CliResult<()> {
        let json = serde_json::to_string(self).map_err(|e| CliError::Internal(e.to_string()))?;
        evoretrieve::io::write_atomic(&Self::sidecar_path(index), json.as_bytes())?;
        Ok(())
    }

    pub fn embed(&self, id: &str, text: &str) -> Query32 {
        Query32::new(id, text, synth_embed(text, self.dim, self.seed))
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let s = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&s).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}
