//! Corpus ingestion and persistence.

pub mod binary;
pub mod jsonl;
pub mod qrels;
pub mod synth;

pub use binary::{load_binary, read_binary, save_binary, write_binary, MAGIC};
pub use jsonl::{load_corpus_jsonl, read_corpus_jsonl, read_records, save_corpus_jsonl, RawRecord};
pub use qrels::{load_qrels, read_qrels};
pub use synth::synth_embed;

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = std::path::PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
