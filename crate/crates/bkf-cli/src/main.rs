//! `bkf` — balance-of-knowledge-flows pipeline.
//!
//! Subcommands: `generate` a seeded synthetic corpus, `validate` input
//! files, `compute` the full report set, `pair` a bilateral breakdown,
//! and `top` ranked field or specialization lists.
//!
//! Exit codes: 0 success, 1 data or semantic error, 2 environment/IO
//! error. Set `BKF_LOG=quiet|info|debug` for stderr verbosity.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    /// Broken data or semantics: exit code 1.
    Data(String),
    /// Missing files, unwritable outputs, other environment trouble: exit 2.
    Env(String),
}

impl From<bkf_core::BkfError> for CliError {
    fn from(err: bkf_core::BkfError) -> Self {
        CliError::Data(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum LogLevel {
    Quiet,
    Info,
    Debug,
}

pub fn log_level() -> LogLevel {
    match std::env::var("BKF_LOG").as_deref() {
        Ok("quiet") => LogLevel::Quiet,
        Ok("debug") => LogLevel::Debug,
        _ => LogLevel::Info,
    }
}

#[derive(Parser)]
#[command(
    name = "bkf",
    version,
    about = "Citation-flow accounting: balances of knowledge flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate the corpus files, printing a diagnostics report
    Validate(ValidateArgs),
    /// Run the full pipeline and write every report table
    Compute(ComputeArgs),
    /// Write the bilateral tables for a pair of countries
    Pair(PairArgs),
    /// Generate a seeded synthetic corpus in the canonical formats
    Generate(GenerateArgs),
    /// Print ranked field balances or specialization indexes
    Top(TopArgs),
}

/// Input file locations; individual flags override the canonical names
/// inside the data directory.
#[derive(Args)]
struct InputArgs {
    /// Directory holding publications.jsonl, citations.csv, journals.csv,
    /// sc_areas.csv, and config.txt
    data_dir: PathBuf,
    /// Publication records (JSONL)
    #[arg(long)]
    publications: Option<PathBuf>,
    /// Citation links (CSV)
    #[arg(long)]
    citations: Option<PathBuf>,
    /// Journal subject categories (CSV)
    #[arg(long)]
    journals: Option<PathBuf>,
    /// Subject-category macro-areas (CSV)
    #[arg(long)]
    areas: Option<PathBuf>,
    /// Analysis configuration file
    #[arg(long)]
    config: Option<PathBuf>,
}

impl InputArgs {
    fn publications_path(&self) -> PathBuf {
        self.publications
            .clone()
            .unwrap_or_else(|| self.data_dir.join("publications.jsonl"))
    }

    fn citations_path(&self) -> PathBuf {
        self.citations
            .clone()
            .unwrap_or_else(|| self.data_dir.join("citations.csv"))
    }

    fn journals_path(&self) -> PathBuf {
        self.journals
            .clone()
            .unwrap_or_else(|| self.data_dir.join("journals.csv"))
    }

    fn areas_path(&self) -> PathBuf {
        self.areas
            .clone()
            .unwrap_or_else(|| self.data_dir.join("sc_areas.csv"))
    }

    fn config_path(&self) -> PathBuf {
        self.config
            .clone()
            .unwrap_or_else(|| self.data_dir.join("config.txt"))
    }
}

/// Config-file overrides shared by the analysis subcommands.
#[derive(Args, Default)]
struct OverrideArgs {
    /// Comma-separated country list overriding the configuration
    #[arg(long)]
    countries: Option<String>,
    /// Citation cutoff date (YYYY-MM-DD) overriding the configuration
    #[arg(long)]
    cutoff: Option<String>,
    /// Made-in threshold (fraction like 1/2) overriding the configuration
    #[arg(long)]
    threshold: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    inputs: InputArgs,
    #[command(flatten)]
    overrides: OverrideArgs,
    /// Directory for the JSON report
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    inputs: InputArgs,
    #[command(flatten)]
    overrides: OverrideArgs,
    /// Output directory for the report tables and manifest
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also dump every gain record to gains.csv
    #[arg(long)]
    dump_gains: bool,
    /// Worker cap; accepted for interface stability, the pipeline is
    /// currently single-pass and its output never depends on this
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct PairArgs {
    #[command(flatten)]
    inputs: InputArgs,
    /// Perspective country
    k: String,
    /// Partner country
    l: String,
    #[command(flatten)]
    overrides: OverrideArgs,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator parameter file (flat key-value format)
    #[arg(long)]
    params: PathBuf,
    /// Directory for the generated corpus files
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableKind {
    /// Per-field balances (deficits and surpluses)
    Bkf,
    /// Knowledge outflow specialization indexes
    Kosi,
    /// Knowledge inflow specialization indexes
    Kisi,
}

#[derive(Args)]
struct TopArgs {
    #[command(flatten)]
    inputs: InputArgs,
    #[command(flatten)]
    overrides: OverrideArgs,
    /// Which table to rank
    #[arg(long, value_enum)]
    table: TableKind,
    /// Country whose rows are ranked
    #[arg(long)]
    country: String,
    /// Number of rows per direction
    #[arg(short = 'n', long, default_value_t = 10)]
    count: usize,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Validate(args) => commands::run_validate(args),
        Command::Compute(args) => commands::run_compute(args),
        Command::Pair(args) => commands::run_pair(args),
        Command::Generate(args) => commands::run_generate(args),
        Command::Top(args) => commands::run_top(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Data(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Env(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
