use evoretrieve::io::{load_binary, write_atomic};
use evoretrieve::Query32;

use crate::args::SearchArgs;
use crate::error::{CliError, CliResult};
use crate::results::{read_json, run_search, SynthRecipe};

pub fn run(args: &SearchArgs) -> CliResult<()> {
    let corpus = load_binary(&args.index)?;
    let query: Query32 = match (&args.query_text, &args.query_file) {
        (Some(text), _) => {
            let recipe = SynthRecipe::load(&args.index)?.ok_or_else(|| {
                CliError::data(format!(
                    "{} was not built with --synth; pass an embedded query with --query-file",
                    args.index.display()
                ))
            })?;
            recipe.embed(&args.query_id, text)
        }
        (None, Some(path)) => read_json(path)?,
        (None, None) => return Err(CliError::Usage("--query-text or --query-file required".into())),
    };
    if query.embedding.dim() != corpus.dim() {
        return Err(CliError::data(format!(
            "query dim {} does not match index dim {}",
            query.embedding.dim(),
            corpus.dim()
        )));
    }

    let doc = run_search(&corpus, &query, args.algo.into(), args.seed, &args.engine, args.timing)?;
    write_atomic(&args.out, doc.to_json()?.as_bytes())?;
    if let Some(t) = &doc.timing_ms {
        eprintln!("search {:.1} ms, assemble {:.1} ms", t.search_ms, t.assemble_ms);
    }
    Ok(())
}
