use std::io::{self, IsTerminal};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use speakable::demo::{build_demo_registry, Home};
use speakable_cli::corpus::{evaluate, load_corpus, CorpusError};
use speakable_cli::repl::{Repl, ReplOptions};

#[derive(Parser)]
#[command(name = "speakable", version, about = "Map English sentences to commands")]
struct Cli {
    /// Minimum similarity score for a match, in [0, 1].
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Print similarity scores alongside results.
    #[arg(long, global = true)]
    show_scores: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Interactive session against the demo home (default).
    Repl,
    /// Check a JSON Lines corpus of sentences and expected calls.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let home = Home::new();
    let mut registry = build_demo_registry(&home);
    if let Some(threshold) = cli.threshold {
        registry = registry.with_threshold(threshold)?;
    }

    match cli.command.unwrap_or(Command::Repl) {
        Command::Repl => {
            let stdin = io::stdin();
            let options = ReplOptions {
                show_scores: cli.show_scores,
                prompt: stdin.is_terminal(),
            };
            Repl::new(&registry, options)
                .with_home(&home)
                .run(stdin.lock(), io::stdout().lock())
                .context("i/o failure")?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { corpus, json } => {
            let entries = match load_corpus(&corpus) {
                Ok(entries) => entries,
                Err(e @ CorpusError::Malformed { .. }) => {
                    eprintln!("error: {}: {e}", corpus.display());
                    return Ok(ExitCode::from(2));
                }
                Err(e) => return Err(e.into()),
            };
            if entries.is_empty() {
                eprintln!("warning: {} contains no entries", corpus.display());
            }
            let report = evaluate(&registry, &entries);
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_table(cli.show_scores));
            }
            Ok(ExitCode::from(report.exit_code() as u8))
        }
    }
}
