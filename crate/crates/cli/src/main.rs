//! `statsol` command-line front end.
//!
//! Exit codes: 0 on success, 1 on a failed verdict or a not-found outcome,
//! 2 on config, schema or I/O errors.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::Builtin;

#[derive(Parser, Debug)]
#[command(name = "statsol", version, about = "Learn solution concepts from samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for the report file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Suppress the summary line.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Minimal-subsidy payoff from sampled coalition values.
    Tucore,
    /// First partition no sampled coalition blocks.
    Hedonic,
    /// Empirical Condorcet winner and tournament structure.
    Condorcet,
    /// Restricted consistent outcome of a Fisher market.
    Market,
    /// Brute-force solution dimension of a finite instance.
    Dimension {
        /// Use a bundled instance instead of a config.
        #[arg(long, value_enum)]
        builtin: Option<Builtin>,
        #[arg(long, default_value_t = 4)]
        points: usize,
    },
    /// Monte-Carlo check of the PAC contract for a game family.
    Validate,
    /// Monte-Carlo check of uniform convergence on a finite instance.
    Uc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let options = run::Options {
        config: cli.config,
        seed: cli.seed,
        out: cli.out,
        format: cli.format,
        quiet: cli.quiet,
    };
    let code = match run::execute(&cli.command, &options) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("statsol: {e}");
            2
        }
    };
    ExitCode::from(code)
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Tucore => "tucore",
            Command::Hedonic => "hedonic",
            Command::Condorcet => "condorcet",
            Command::Market => "market",
            Command::Dimension { .. } => "dimension",
            Command::Validate => "validate",
            Command::Uc => "uc",
        }
    }
}
