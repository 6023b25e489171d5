//! Binary corpus index.
//!
//! ```text
//! header:  magic "EVS1" | dim: u32 LE | count: u64 LE
//! per doc: id_len: u32 LE | id (UTF-8) | text_len: u32 LE | text (UTF-8)
//!          | dim x f32 LE
//! ```

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Corpus, Document, EmbeddingVector};

pub const MAGIC: [u8; 4] = *b"EVS1";
const HEADER_LEN: usize = 4 + 4 + 8;

pub fn write_binary(corpus: &Corpus<f32>) -> Result<Vec<u8>> {
    let dim = u32::try_from(corpus.dim())
        .map_err(|_| Error::InvalidArgument("dim does not fit in u32".into()))?;
    if dim == 0 {
        return Err(Error::InvalidArgument("corpus dim must be positive".into()));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + corpus.len() * (16 + 4 * corpus.dim()));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&dim.to_le_bytes());
    out.extend_from_slice(&(corpus.len() as u64).to_le_bytes());
    for doc in corpus.docs() {
        if doc.embedding.dim() != corpus.dim() {
            return Err(Error::dim(corpus.dim(), doc.embedding.dim()));
        }
        for s in [&doc.id, &doc.text] {
            let len = u32::try_from(s.len())
                .map_err(|_| Error::InvalidArgument(format!("string too long in {:?}", doc.id)))?;
            out.extend_from_slice(&len.to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        }
        for v in doc.embedding.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn save_binary(corpus: &Corpus<f32>, path: impl AsRef<Path>) -> Result<()> {
    super::write_atomic(path.as_ref(), &write_binary(corpus)?)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| {
                Error::CorruptIndex(format!("truncated while reading {what} at byte {}", self.pos))
            })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let len = self.u32(what)? as usize;
        let bytes = self.take(len, what)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| Error::CorruptIndex(format!("{what} is not valid UTF-8")))
    }
}

pub fn read_binary(bytes: &[u8]) -> Result<Corpus<f32>> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::CorruptIndex(format!(
            "bad magic {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let dim = cur.u32("dim")? as usize;
    if dim == 0 {
        return Err(Error::CorruptIndex("dim is zero".into()));
    }
    let count = cur.u64("count")?;
    // Each record needs at least its two length prefixes and the vector.
    let min_record = 8 + 4 * dim as u64;
    if count.saturating_mul(min_record) > (bytes.len() - cur.pos) as u64 {
        return Err(Error::CorruptIndex(format!(
            "header claims {count} documents but the file is too short"
        )));
    }

    let mut seen = HashSet::new();
    let mut docs = Vec::with_capacity(count as usize);
    for k in 0..count {
        let id = cur.string("document id")?;
        let text = cur.string("document text")?;
        let raw = cur.take(4 * dim, "embedding")?;
        let values: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        let embedding = EmbeddingVector::new(values)
            .map_err(|e| Error::CorruptIndex(format!("document {k}: {e}")))?;
        if !seen.insert(id.clone()) {
            return Err(Error::CorruptIndex(format!("duplicate document id {id:?}")));
        }
        docs.push(Document::new(id, text, embedding));
    }
    if cur.pos != bytes.len() {
        return Err(Error::CorruptIndex(format!(
            "{} trailing bytes after the last document",
            bytes.len() - cur.pos
        )));
    }
    Ok(Corpus::from_parts(dim, docs))
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<Corpus<f32>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_binary(&bytes)
}
