//! Corpus JSONL: one object per line with `id` (string), optional `text`
//! (string, default empty) and `embedding` (array of numbers). The first
//! record fixes the dimension. Blank lines are skipped.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Corpus, Document, EmbeddingVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RawRecord {
    pub id: String,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub embedding: Option<Vec<f64>>,
}

/// Parses records without checking embeddings; yields `(line number, record)`.
pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<(usize, RawRecord)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        out.push((line_no, rec));
    }
    Ok(out)
}

pub fn read_corpus_jsonl<T: Scalar, R: BufRead>(reader: R) -> Result<Corpus<T>> {
    let mut dim: Option<usize> = None;
    let mut seen = HashSet::new();
    let mut docs = Vec::new();
    for (line, rec) in read_records(reader)? {
        let values = rec.embedding.ok_or_else(|| Error::Parse {
            line,
            message: "missing field `embedding`".into(),
        })?;
        let expected = *dim.get_or_insert(values.len());
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
                line: Some(line),
            });
        }
        let embedding = EmbeddingVector::from_f64_slice(&values).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateId {
                id: rec.id,
                line: Some(line),
            });
        }
        docs.push(Document::new(rec.id, rec.text, embedding));
    }
    Ok(Corpus::from_parts(dim.unwrap_or(0), docs))
}

pub fn load_corpus_jsonl<T: Scalar>(path: impl AsRef<Path>) -> Result<Corpus<T>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus_jsonl(BufReader::new(f))
}

#[derive(Serialize)]
struct OutRecord<'a, T: Scalar> {
    id: &'a str,
    text: &'a str,
    embedding: &'a [T],
}

pub fn save_corpus_jsonl<T: Scalar>(corpus: &Corpus<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    for d in corpus.docs() {
        let rec = OutRecord {
            id: &d.id,
            text: &d.text,
            embedding: d.embedding.as_slice(),
        };
        serde_json::to_writer(&mut buf, &rec).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        buf.push(b'\n');
    }
    super::write_atomic(path.as_ref(), &buf)
}
