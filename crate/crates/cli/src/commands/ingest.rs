use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;

use evoretrieve::io::{load_corpus_jsonl, read_records, save_binary, synth_embed};
use evoretrieve::{validate_corpus, Corpus32, Document32};

use crate::args::IngestArgs;
use crate::error::{CliError, CliResult};
use crate::results::SynthRecipe;

pub fn run(args: &IngestArgs) -> CliResult<()> {
    let corpus = if args.synth {
        synth_corpus(args)?
    } else {
        let c: Corpus32 = load_corpus_jsonl(&args.input)?;
        if c.is_empty() {
            return Err(CliError::data(format!(
                "{}: no documents; cannot infer the embedding dimension",
                args.input.display()
            )));
        }
        c
    };

    let violations = validate_corpus(&corpus);
    if let Some(v) = violations.first() {
        return Err(CliError::data(v));
    }
    save_binary(&corpus, &args.out)?;
    if args.synth {
        SynthRecipe {
            dim: args.dim,
            seed: args.seed,
        }
        .save(&args.out)?;
    }
    println!("ingested {} documents (dim {})", corpus.len(), corpus.dim());
    Ok(())
}

fn synth_corpus(args: &IngestArgs) -> CliResult<Corpus32> {
    if args.dim == 0 {
        return Err(CliError::Usage("--dim must be positive".into()));
    }
    let f = File::open(&args.input)
        .map_err(|e| CliError::data(format!("{}: {e}", args.input.display())))?;
    let records = read_records(BufReader::new(f))?;
    let mut seen = HashSet::new();
    for (line, rec) in &records {
        if !seen.insert(rec.id.as_str()) {
            return Err(CliError::data(format!(
                "duplicate document id {:?} at line {line}",
                rec.id
            )));
        }
    }
    let docs: Vec<Document32> = {
        use rayon::prelude::*;
        records
            .into_par_iter()
            .map(|(_, r)| {
                let e = synth_embed(&r.text, args.dim, args.seed);
                Document32::new(r.id, r.text, e)
            })
            .collect()
    };
    Ok(Corpus32::from_parts(args.dim, docs))
}
