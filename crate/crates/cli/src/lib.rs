//! The `woodmask` command line: every subcommand reads its inputs, writes
//! outputs only to the paths it is given, and reports through [`Outcome`]
//! or a [`Failure`] carrying the exit code.

pub mod args;
pub mod commands;
pub mod failure;
pub mod output;

use std::path::PathBuf;

pub use args::{Cli, Command};
pub use failure::{CmdResult, Failure};

/// What a successful command prints: a human-readable summary and the
/// files it wrote.
#[derive(Debug, Default)]
pub struct Outcome {
    pub summary: String,
    pub reports: Vec<PathBuf>,
}

pub fn run(cli: Cli) -> CmdResult<Outcome> {
    use commands::{dataset, evaluate, review};

    if let Command::Serve(args) = cli.command {
        return review::serve(args);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| Failure::validation(format!("--workers: {e}")))?;
    pool.install(|| match cli.command {
        Command::Ingest(a) => dataset::ingest(a),
        Command::Flatten(a) => dataset::flatten(a),
        Command::Stats(a) => dataset::stats(a),
        Command::Split(a) => dataset::split(a),
        Command::Eval(a) => evaluate::eval(a),
        Command::Agree(a) => evaluate::agree(a),
        Command::CastProposals(a) => review::cast_proposals(a),
        Command::ApplyDecisions(a) => review::apply_decisions(a),
        Command::Serve(_) => unreachable!("handled above"),
    })
}
