//! Relevance judgments as UTF-8 TSV: `query_id<TAB>doc_id<TAB>rel`, `rel` in
//! {0, 1}. Lines starting with `#` and blank lines are ignored.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::RelevanceJudgments;

pub fn read_qrels<R: BufRead>(reader: R) -> Result<RelevanceJudgments> {
    let mut qrels = RelevanceJudgments::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = line.map_err(|e| parse_err(e.to_string()))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [query, doc, rel] = fields[..] else {
            return Err(parse_err(format!(
                "expected 3 tab-separated fields, found {}",
                fields.len()
            )));
        };
        let rel = match rel.trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(parse_err(format!("relevance must be 0 or 1, got {other:?}"))),
        };
        qrels.insert(query, doc, rel)?;
    }
    Ok(qrels)
}

pub fn load_qrels(path: impl AsRef<Path>) -> Result<RelevanceJudgments> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_qrels(BufReader::new(f))
}
