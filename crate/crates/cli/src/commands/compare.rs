use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use evoretrieve::io::{load_binary, load_qrels, read_records, write_atomic};
use evoretrieve::metrics::evaluate;
use evoretrieve::{Algorithm, Corpus32, EmbeddingVector, Query32, RelevanceJudgments, ResultList};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::CompareArgs;
use crate::error::{CliError, CliResult};
use crate::results::{pretty_json, run_search, ResultsDocument, SynthRecipe};

pub const SUMMARY_SCHEMA: &str = "evoretrieve-compare/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// `(seed, MAP over all queries)`.
    pub per_seed: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub query_id: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub schema: String,
    pub queries: usize,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    pub top_n: usize,
    /// Keyed by `algorithm/kind`, e.g. `ga/merged`.
    pub map: BTreeMap<String, MapStats>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareTiming {
    /// Mean wall-clock per cell (search plus assembly), by algorithm.
    pub mean_cell_ms: BTreeMap<String, f64>,
    /// Mean exhaustive-scan time of the baseline cells.
    pub baseline_scan_ms: Option<f64>,
    pub corpus_size: usize,
    pub dim: usize,
}

struct Cell {
    query: usize,
    algorithm: Algorithm,
    seed: u64,
}

struct CellOutcome {
    doc: Option<ResultsDocument>,
    failure: Option<Failure>,
    wall_ms: f64,
    scan_ms: Option<f64>,
}

pub fn load_queries(path: &Path, corpus: &Corpus32, index: &Path) -> CliResult<Vec<Query32>> {
    let f = File::open(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let records = read_records(BufReader::new(f))?;
    let recipe = SynthRecipe::load(index)?;
    records
        .into_iter()
        .map(|(line, r)| {
            let q = match r.embedding {
                Some(v) => Query32::new(
                    r.id,
                    r.text,
                    EmbeddingVector::from_f64_slice(&v)
                        .map_err(|e| CliError::data(format!("line {line}: {e}")))?,
                ),
                None => recipe
                    .ok_or_else(|| {
                        CliError::data(format!(
                            "line {line}: query has no embedding and the index was not built with --synth"
                        ))
                    })?
                    .embed(&r.id, &r.text),
            };
            if q.embedding.dim() != corpus.dim() {
                return Err(CliError::data(format!(
                    "line {line}: query dim {} does not match index dim {}",
                    q.embedding.dim(),
                    corpus.dim()
                )));
            }
            Ok(q)
        })
        .collect()
}

fn file_stem(query_id: &str) -> String {
    query_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn result_path(out: &Path, query_index: usize, query_id: &str, algo: Algorithm, seed: u64) -> PathBuf {
    out.join("results").join(format!(
        "{query_index:04}_{}__{algo}__seed{seed}.json",
        file_stem(query_id)
    ))
}

fn summarize(
    outcomes: &[(Cell, CellOutcome)],
    queries: &[Query32],
    args: &CompareArgs,
    seeds: &[u64],
    qrels: &RelevanceJudgments,
) -> CliResult<CompareSummary> {
    // label -> seed -> lists
    let mut grouped: BTreeMap<String, BTreeMap<u64, Vec<ResultList>>> = BTreeMap::new();
    let mut failures = Vec::new();
    for (cell, outcome) in outcomes {
        if let Some(f) = &outcome.failure {
            failures.push(f.clone());
        }
        let Some(doc) = &outcome.doc else { continue };
        for (kind, set) in doc.resultsets.labelled() {
            grouped
                .entry(format!("{}/{kind}", cell.algorithm))
                .or_default()
                .entry(cell.seed)
                .or_default()
                .push(set.to_result_list());
        }
    }

    let mut map = BTreeMap::new();
    for (label, by_seed) in grouped {
        let mut per_seed = Vec::new();
        for (seed, lists) in by_seed {
            let report = evaluate(&lists, qrels, &[args.engine.top_n])?;
            per_seed.push((seed, report.map_value));
        }
        let values: Vec<f64> = per_seed.iter().map(|p| p.1).collect();
        map.insert(
            label,
            MapStats {
                mean: values.iter().sum::<f64>() / values.len() as f64,
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                per_seed,
            },
        );
    }

    Ok(CompareSummary {
        schema: SUMMARY_SCHEMA.to_owned(),
        queries: queries.len(),
        algorithms: args.algos.iter().map(|&a| a.into()).collect(),
        seeds: seeds.to_vec(),
        top_n: args.engine.top_n,
        map,
        failures,
    })
}

pub fn render_table(summary: &CompareSummary, timing: &CompareTiming) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<24} {:>8} {:>8} {:>8}",
        "algorithm/resultset", "MAP", "min", "max"
    );
    for (label, m) in &summary.map {
        let _ = writeln!(s, "{label:<24} {:>8.4} {:>8.4} {:>8.4}", m.mean, m.min, m.max);
    }
    let _ = writeln!(s);
    for (algo, ms) in &timing.mean_cell_ms {
        let _ = writeln!(s, "{algo:<24} mean wall-clock {ms:.1} ms");
    }
    if let Some(scan) = timing.baseline_scan_ms {
        let _ = writeln!(
            s,
            "baseline scan of {} docs x dim {}: {scan:.1} ms",
            timing.corpus_size, timing.dim
        );
    }
    if !summary.failures.is_empty() {
        let _ = writeln!(s, "{} failed runs (see summary.json)", summary.failures.len());
    }
    s
}

pub fn run(args: &CompareArgs) -> CliResult<()> {
    if args.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let corpus = load_binary(&args.index)?;
    let queries = load_queries(&args.queries, &corpus, &args.index)?;
    let qrels = load_qrels(&args.qrels)?;
    let seeds: Vec<u64> = (0..args.seeds).map(|k| args.seed_base + k).collect();

    std::fs::create_dir_all(args.out.join("results"))
        .map_err(|e| CliError::data(format!("{}: {e}", args.out.display())))?;

    let mut cells = Vec::new();
    for q in 0..queries.len() {
        for &algo in &args.algos {
            for &seed in &seeds {
                cells.push(Cell {
                    query: q,
                    algorithm: algo.into(),
                    seed,
                });
            }
        }
    }

    let outcomes: Vec<(Cell, CellOutcome)> = cells
        .into_par_iter()
        .map(|cell| {
            let query = &queries[cell.query];
            let start = Instant::now();
            let result = run_search(&corpus, query, cell.algorithm, cell.seed, &args.engine, true)
                .and_then(|mut doc| {
                    let timing = doc.timing_ms.take();
                    let path = result_path(&args.out, cell.query, &query.id, cell.algorithm, cell.seed);
                    write_atomic(&path, doc.to_json()?.as_bytes())?;
                    Ok((doc, timing))
                });
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let outcome = match result {
                Ok((doc, timing)) => CellOutcome {
                    scan_ms: (cell.algorithm == Algorithm::Baseline)
                        .then(|| timing.map(|t| t.search_ms))
                        .flatten(),
                    doc: Some(doc),
                    failure: None,
                    wall_ms,
                },
                Err(e) => {
                    log::error!("{} / {} / seed {}: {e}", query.id, cell.algorithm, cell.seed);
                    CellOutcome {
                        doc: None,
                        failure: Some(Failure {
                            query_id: query.id.clone(),
                            algorithm: cell.algorithm,
                            seed: cell.seed,
                            error: e.to_string(),
                        }),
                        wall_ms,
                        scan_ms: None,
                    }
                }
            };
            (cell, outcome)
        })
        .collect();

    let summary = summarize(&outcomes, &queries, args, &seeds, &qrels)?;

    let mut wall: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    let mut scans = Vec::new();
    for (cell, o) in &outcomes {
        let e = wall.entry(cell.algorithm.to_string()).or_default();
        e.0 += o.wall_ms;
        e.1 += 1;
        scans.extend(o.scan_ms);
    }
    let timing = CompareTiming {
        mean_cell_ms: wall.into_iter().map(|(k, (t, n))| (k, t / n as f64)).collect(),
        baseline_scan_ms: (!scans.is_empty()).then(|| scans.iter().sum::<f64>() / scans.len() as f64),
        corpus_size: corpus.len(),
        dim: corpus.dim(),
    };

    write_atomic(&args.out.join("summary.json"), pretty_json(&summary)?.as_bytes())?;
    write_atomic(&args.out.join("timing.json"), pretty_json(&timing)?.as_bytes())?;
    print!("{}", render_table(&summary, &timing));

    if summary.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::data(format!(
            "{} of {} runs failed",
            summary.failures.len(),
            outcomes.len()
        )))
    }
}
