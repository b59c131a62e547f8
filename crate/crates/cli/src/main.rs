//! `dirgeom` command-line driver.
//!
//! Exit codes: 0 all checks passed, 1 counterexample found, 2 input error,
//! 3 guard or capability error.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dirgeom::census::DEFAULT_SEED;

#[derive(Parser, Debug)]
#[command(name = "dirgeom", version, about = "Directions, projection polynomials and degree bounds over F_p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Odd prime modulus.
    #[arg(short = 'p', long = "prime")]
    pub p: u64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Write the main report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct PlanArgs {
    /// Enumerate every instance.
    #[arg(long, conflicts_with = "sample")]
    pub exhaustive: bool,
    /// Draw this many seeded random instances.
    #[arg(long, value_name = "N")]
    pub sample: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
    pub seed: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Number of index ranges the stream is split into.
    #[arg(long)]
    pub chunks: Option<usize>,
    /// Point-set size (defaults to p).
    #[arg(short = 'k', long)]
    pub k: Option<usize>,
    /// Maximum number of failure witnesses kept.
    #[arg(long, default_value_t = dirgeom::census::DEFAULT_MAX_WITNESSES)]
    pub max_witnesses: usize,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("bad seed {s:?}: {e}"))
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Direction set, line test and projection degrees of a point set.
    Directions {
        #[command(flatten)]
        common: Common,
        /// Points as "x,y x,y ...".
        #[arg(long, conflicts_with = "file")]
        points: Option<String>,
        /// File holding the same point literal.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Run a checker over one instance or over an enumeration plan.
    Verify {
        /// redei, main, kiss_somlai, proposition, projection_support, gacs,
        /// szonyi, dsw, parity_identity, sum_criterion
        statement: String,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        plan: PlanArgs,
        /// Check a single point set instead of a plan.
        #[arg(long)]
        points: Option<String>,
        /// Check a single function given by its p values.
        #[arg(long)]
        values: Option<String>,
        /// Check a single polynomial given as a coefficient list, e.g. "[1,0,1]".
        #[arg(long)]
        poly: Option<String>,
    },
    /// Orbit classification of extremal polynomials or point sets.
    Classify {
        target: ClassifyTarget,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Interpolate a value table.
    Interpolate {
        #[command(flatten)]
        common: Common,
        /// Comma or whitespace separated values.
        #[arg(long, conflicts_with = "file")]
        values: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Direction bound for a Cartesian product A x B.
    Product {
        #[command(flatten)]
        common: Common,
        #[arg(long = "a")]
        xs: String,
        #[arg(long = "b")]
        ys: String,
    },
    /// Direction-count census of k-point sets (CSV: p,k,d,count,exemplar).
    Census {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        plan: PlanArgs,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClassifyTarget {
    Polys,
    Sets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Directions {
            common,
            points,
            file,
        } => commands::directions(&common, points, file),
        Command::Verify {
            statement,
            common,
            plan,
            points,
            values,
            poly,
        } => commands::verify(&statement, &common, &plan, points, values, poly),
        Command::Classify {
            target,
            common,
            workers,
        } => commands::classify(target, &common, workers),
        Command::Interpolate {
            common,
            values,
            file,
        } => commands::interpolate(&common, values, file),
        Command::Product { common, xs, ys } => commands::product(&common, &xs, &ys),
        Command::Census { common, plan } => commands::census(&common, &plan),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
