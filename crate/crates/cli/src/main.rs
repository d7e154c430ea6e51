//! `qipsim`: check, run, sweep and trace protocol files.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qipsim", version, about = "Simulate interactive proofs with quantum finite automaton verifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a protocol file against the claims it declares.
    Check(CheckArgs),
    /// Run one prover on one input.
    Run(RunArgs),
    /// Evaluate many inputs, honestly or against the adversary family.
    Sweep(SweepArgs),
    /// Dump the configurations of a run step by step.
    Trace(TraceArgs),
    /// Write a built-in protocol as a protocol file.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Options shared by every subcommand that loads a protocol.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Protocol file, or `builtin:NAME`.
    pub spec: String,
    /// Numerical tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tau: f64,
    /// Verifier step limit; defaults to the protocol's own bound.
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Squared amplitudes at or below this are dropped.
    #[arg(long, default_value_t = 1e-12)]
    pub prune: f64,
    /// Prover tape length; defaults to max-steps + 2.
    #[arg(long)]
    pub tape_trunc: Option<usize>,
    /// Accepted for compatibility; every computation is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fourier dimension for protocols that take one.
    #[arg(long = "N", value_name = "N")]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// Longest input for well-formedness and completeness checks.
    #[arg(long, default_value_t = 6)]
    pub n_max: usize,
    /// Longest non-member checked against the adversary family.
    #[arg(long, default_value_t = 4)]
    pub sound_max: usize,
    #[arg(long, default_value_t = qip_core::zoo::DEFAULT_SEARCH_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "")]
    pub input: String,
    /// `honest`, `identity`, `eraser`, `never-edit`, `worst`, or the id of a
    /// member of the protocol's adversary family.
    #[arg(long, default_value = "honest")]
    pub prover: String,
    #[arg(long)]
    pub count_interactions: bool,
    #[arg(long, default_value_t = qip_core::zoo::DEFAULT_SEARCH_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Select {
    All,
    Members,
    Negatives,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Honest,
    Worst,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0)]
    pub min_len: usize,
    #[arg(long, default_value_t = 6)]
    pub max_len: usize,
    /// Comma-separated inputs; replaces the length range.
    #[arg(long, value_delimiter = ',')]
    pub inputs: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = Select::All)]
    pub select: Select,
    /// Keep only odd-length inputs.
    #[arg(long)]
    pub odd_length: bool,
    #[arg(long, value_enum, default_value_t = Family::Worst)]
    pub family: Family,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value_t = qip_core::zoo::DEFAULT_SEARCH_BUDGET)]
    pub budget: usize,
    #[arg(long)]
    pub count_interactions: bool,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "")]
    pub input: String,
    #[arg(long, default_value = "honest")]
    pub prover: String,
    /// Dump the modified computation with per-step query mass instead.
    #[arg(long)]
    pub mcomp: bool,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub name: String,
    #[arg(long = "N", value_name = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => commands::check(&a),
        Command::Run(a) => commands::run(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Trace(a) => commands::trace(&a),
        Command::Export(a) => commands::export(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
