use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod params;

/// Code-based PIR laboratory: parameter checks, databases, retrieval,
/// attacks and tables.
#[derive(Parser, Debug)]
#[command(name = "cbpir", version)]
struct Cli {
    /// JSON parameter file (keys b, s, v, n, k, m, L, f, seed, weight_target).
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Overrides the parameter file's seed for randomized steps; the field
    /// tower always comes from the file's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Server address, host:port.
    #[arg(long, global = true, env = "CBPIR_ADDR")]
    endpoint: Option<String>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check parameters and print rates, thresholds and m0.
    Validate,
    /// Write a uniformly random database to --out.
    Gendb,
    /// Serve a database file at --endpoint.
    Serve {
        #[arg(long)]
        db: PathBuf,
    },
    /// Run one batch and write recovered files plus a transcript.
    ///
    /// Queries go to --endpoint when one is set, otherwise the database
    /// is answered in-process; --db also verifies the recovered files.
    Retrieve {
        /// File indices, 0-based, comma separated; exactly f of them.
        #[arg(long, value_delimiter = ',', required = true)]
        indices: Vec<usize>,
        #[arg(long)]
        db: Option<PathBuf>,
    },
    /// Monte-Carlo sub-query rank attack; CSV to --out or stdout.
    Attack {
        #[arg(long, value_enum, default_value_t = SchemeKind::Original)]
        scheme: SchemeKind,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Attack a random secret of exactly this weight instead of the
        /// scheme's own secret row.
        #[arg(long)]
        weight: Option<usize>,
        /// Force single-block argmin or subset enumeration.
        #[arg(long, value_enum)]
        rule: Option<Rule>,
        /// Lift the 10^6 subset cap.
        #[arg(long)]
        allow_large: bool,
    },
    /// Write rates.csv, fig3.csv and bounds.csv into --out.
    Tables,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeKind {
    Original,
    Modified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Single,
    Subset,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(String),
}

impl From<cbpir::Error> for Failure {
    fn from(e: cbpir::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let ctx = commands::Context {
        params: cli.params,
        seed: cli.seed,
        endpoint: cli.endpoint,
        out: cli.out,
    };
    let result = match cli.command {
        Command::Validate => commands::validate(&ctx),
        Command::Gendb => commands::gendb(&ctx),
        Command::Serve { db } => commands::serve(&ctx, &db),
        Command::Retrieve { indices, db } => commands::retrieve(&ctx, &indices, db.as_deref()),
        Command::Attack {
            scheme,
            trials,
            weight,
            rule,
            allow_large,
        } => commands::attack(&ctx, scheme, trials, weight, rule, allow_large),
        Command::Tables => commands::tables(&ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
