#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use evoretrieve::io::synth_embed;
use evoretrieve::{Corpus32, Document32, EmbeddingVector, Query32};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_evoretrieve"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn evoretrieve")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "evoretrieve {args:?} failed ({:?}):\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "ze", "bu", "da", "fe", "go", "hi", "ja",
];

/// A small pseudo-word vocabulary so synthetic texts share tokens.
pub fn vocabulary(size: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words: Vec<String> = Vec::with_capacity(size);
    while words.len() < size {
        let len = rng.gen_range(2..=4);
        let w: String = (0..len).map(|_| *SYLLABLES.choose(&mut rng).unwrap()).collect();
        if !words.contains(&w) {
            words.push(w);
        }
    }
    words
}

pub fn random_texts(n: usize, seed: u64) -> Vec<String> {
    let vocab = vocabulary(300, seed ^ 0x5eed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.gen_range(4..=12);
            (0..len)
                .map(|_| vocab.choose(&mut rng).unwrap().as_str())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

pub fn doc_id(i: usize) -> String {
    format!("d{i:05}")
}

/// Text-only JSONL suitable for `ingest --synth`.
pub fn write_text_jsonl(path: &Path, texts: &[String]) {
    let mut s = String::new();
    for (i, t) in texts.iter().enumerate() {
        s.push_str(&serde_json::json!({"id": doc_id(i), "text": t}).to_string());
        s.push('\n');
    }
    fs::write(path, s).unwrap();
}

pub fn random_corpus(n: usize, dim: usize, seed: u64) -> Corpus32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs = (0..n)
        .map(|i| {
            let v: Vec<f32> = (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
            Document32::new(doc_id(i), format!("doc {i}"), EmbeddingVector::new(v).unwrap())
        })
        .collect();
    Corpus32::try_new(dim, docs).unwrap()
}

/// The synthetic-embedder corpus used by the engine-level checks.
pub fn synth_corpus(n: usize, dim: usize, seed: u64) -> Corpus32 {
    let docs = random_texts(n, seed)
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let e = synth_embed(&t, dim, seed);
            Document32::new(doc_id(i), t, e)
        })
        .collect();
    Corpus32::try_new(dim, docs).unwrap()
}

pub fn synth_query(text: &str, dim: usize, seed: u64) -> Query32 {
    Query32::new("q", text, synth_embed(text, dim, seed))
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

pub fn files_in(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}
