use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evoretrieve::de::DeConfig;
use evoretrieve::ga::GaConfig;
use evoretrieve::Algorithm;

#[derive(Debug, Parser)]
#[command(name = "evoretrieve", version, about = "Evolutionary top-N retrieval over embedding corpora")]
pub struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a binary index from a corpus JSONL file.
    Ingest(IngestArgs),
    /// Retrieve the top-N documents for one query.
    Search(SearchArgs),
    /// Score result files against relevance judgments.
    Eval(EvalArgs),
    /// Run several algorithms over a query set and summarise MAP.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Ignore embeddings in the input and synthesize them from `text`.
    #[arg(long)]
    pub synth: bool,
    #[arg(long, default_value_t = 512, requires = "synth")]
    pub dim: usize,
    #[arg(long, default_value_t = 0, requires = "synth")]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Baseline,
    Ga,
    De,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Baseline => Algorithm::Baseline,
            AlgoArg::Ga => Algorithm::Ga,
            AlgoArg::De => Algorithm::De,
        }
    }
}

/// Engine hyperparameters shared by `search` and `compare`.
#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long = "top-n", default_value_t = 10)]
    pub top_n: usize,
    /// Suboptimal resultsets harvested from GA/DE runs.
    #[arg(long, default_value_t = 2)]
    pub suboptimal: usize,
    /// DE scaling factor.
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// DE crossover probability.
    #[arg(long, default_value_t = 0.9)]
    pub cr: f64,
    #[arg(long = "mating-pool", default_value_t = 100)]
    pub mating_pool: usize,
    #[arg(long, default_value_t = 3)]
    pub elitism: usize,
    #[arg(long = "mutation-fraction", default_value_t = 0.10)]
    pub mutation_fraction: f64,
    #[arg(long = "mutation-range", default_value_t = 0.10)]
    pub mutation_range: f64,
    #[arg(long, default_value_t = 50)]
    pub generations: usize,
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub epsilon: f64,
}

impl EngineArgs {
    pub fn ga_config(&self, seed: u64) -> GaConfig {
        GaConfig {
            mating_pool_size: self.mating_pool,
            elitism_count: self.elitism,
            mutation_fraction: self.mutation_fraction,
            mutation_range: self.mutation_range,
            generations: self.generations,
            stagnation_patience: self.patience,
            stagnation_epsilon: self.epsilon,
            seed,
            ..GaConfig::default()
        }
    }

    pub fn de_config(&self, seed: u64) -> DeConfig {
        DeConfig {
            scaling_factor: self.beta,
            crossover_prob: self.cr,
            generations: self.generations,
            stagnation_patience: self.patience,
            stagnation_epsilon: self.epsilon,
            seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// Query text; requires an index built with `ingest --synth`.
    #[arg(long, conflicts_with = "query_file", required_unless_present = "query_file")]
    pub query_text: Option<String>,
    /// JSON object with `id`, optional `text`, and `embedding`.
    #[arg(long)]
    pub query_file: Option<PathBuf>,
    /// Query id used with --query-text.
    #[arg(long, default_value = "query")]
    pub query_id: String,
    #[arg(long, value_enum)]
    pub algo: AlgoArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Record wall-clock timings in the output (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// A results document, or a JSON array of them.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub qrels: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
    pub n: Vec<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// JSONL with `id`, `text` and optional `embedding` per line.
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "baseline,ga,de")]
    pub algos: Vec<AlgoArg>,
    #[arg(long)]
    pub qrels: PathBuf,
    /// Number of seeds; runs use seeds `seed-base .. seed-base + seeds`.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long = "seed-base", default_value_t = 0)]
    pub seed_base: u64,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub out: PathBuf,
}
