//! Command-line front end: ingest corpora, run searches, evaluate and compare.

pub mod args;
pub mod commands;
pub mod error;
pub mod results;

use args::{Cli, Command};
use error::CliResult;

pub fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Ingest(a) => commands::ingest::run(a),
        Command::Search(a) => commands::search::run(a),
        Command::Eval(a) => commands::eval::run(a),
        Command::Compare(a) => commands::compare::run(a),
    }
}
