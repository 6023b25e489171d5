use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use evoretrieve::io::load_qrels;
use evoretrieve::metrics::{evaluate, EvalReport};
use evoretrieve::{RelevanceJudgments, ResultList};
use serde::{Deserialize, Serialize};

use crate::args::{EvalArgs, OutputFormat};
use crate::error::{CliError, CliResult};
use crate::results::{read_json, ResultsDocument};

/// One report per `algorithm/kind` label, e.g. `de/suboptimal_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub reports: BTreeMap<String, EvalReport>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    Many(Vec<ResultsDocument>),
    One(Box<ResultsDocument>),
}

pub fn load_results(path: &std::path::Path) -> CliResult<Vec<ResultsDocument>> {
    Ok(match read_json::<OneOrMany>(path)? {
        OneOrMany::Many(v) => v,
        OneOrMany::One(d) => vec![*d],
    })
}

/// Groups lists by label and evaluates each group.
pub fn evaluate_documents(
    docs: &[ResultsDocument],
    qrels: &RelevanceJudgments,
    n_values: &[usize],
) -> CliResult<EvalOutput> {
    if n_values.is_empty() || n_values.contains(&0) {
        return Err(CliError::Usage("--n values must be positive".into()));
    }
    let mut groups: BTreeMap<String, BTreeMap<String, ResultList>> = BTreeMap::new();
    for d in docs {
        for (kind, set) in d.resultsets.labelled() {
            let label = format!("{}/{kind}", d.algorithm);
            let previous = groups
                .entry(label.clone())
                .or_default()
                .insert(set.query_id.clone(), set.to_result_list());
            if previous.is_some() {
                log::warn!(
                    "{label}: several lists for query {:?}; keeping the last",
                    set.query_id
                );
            }
        }
    }

    let known: BTreeSet<&str> = docs.iter().map(|d| d.query.id.as_str()).collect();
    for q in qrels.query_ids().filter(|q| !known.contains(q)) {
        log::warn!("qrels query {q:?} does not appear in the results; ignored");
    }

    let mut reports = BTreeMap::new();
    for (label, lists) in groups {
        let lists: Vec<ResultList> = lists.into_values().collect();
        reports.insert(label, evaluate(&lists, qrels, n_values)?);
    }
    Ok(EvalOutput { reports })
}

pub fn render_text(out: &EvalOutput) -> String {
    let mut s = String::new();
    for (label, report) in &out.reports {
        let _ = writeln!(s, "{label}");
        for (qid, q) in &report.per_query {
            let _ = write!(s, "  {qid}");
            for (n, p) in &q.p_at_n {
                let _ = write!(s, "  P@{n}={p:.4}");
            }
            let _ = writeln!(s, "  AP={:.4}", q.ap);
        }
        let _ = writeln!(s, "  MAP={:.4}", report.map_value);
    }
    s
}

pub fn run(args: &EvalArgs) -> CliResult<()> {
    let docs = load_results(&args.results)?;
    let qrels = load_qrels(&args.qrels)?;
    let out = evaluate_documents(&docs, &qrels, &args.n)?;
    let no_relevant: BTreeSet<&str> = out
        .reports
        .values()
        .flat_map(|r| r.no_relevant.iter().map(String::as_str))
        .collect();
    for q in no_relevant {
        eprintln!("warning: query {q:?} has no relevant documents in the qrels; AP = 0");
    }
    match args.format {
        OutputFormat::Text => print!("{}", render_text(&out)),
        OutputFormat::Json => println!(
            "{}",
            serde_json::to_string_pretty(&out).map_err(|e| CliError::Internal(e.to_string()))?
        ),
    }
    Ok(())
}
