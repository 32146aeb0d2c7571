//! `regionsynth` — command-line frontend for region-based synthesis.
//!
//! Exit codes: 0 when the checked property holds (or the command simply
//! succeeded), 1 when it fails, 2 for input errors and 3 on timeout.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regionsynth::reductions::Construction;

use commands::Report;

#[derive(Parser, Debug)]
#[command(
    name = "regionsynth",
    version,
    about = "Region-based synthesis of elementary net systems"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Wall-clock budget in seconds for search-heavy commands.
    #[arg(long, global = true, default_value_t = 600, value_parser = clap::value_parser!(u64).range(1..))]
    pub timeout: u64,
    /// Report every failing query instead of stopping at the first.
    #[arg(long, global = true)]
    pub exhaustive: bool,
    /// Largest state count for which all regions are enumerated.
    #[arg(long, global = true, default_value_t = regionsynth::regions::DEFAULT_ENUMERATION_CAP)]
    pub cap: usize,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionSet {
    /// Every region of the system (bounded by `--cap`).
    All,
    /// The witness regions found by the feasibility check.
    Witness,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusKind {
    /// Linear 2-fold systems.
    Linear2,
    /// Linear 3-fold systems.
    Linear3,
    /// General admissible systems.
    General,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the admissibility invariants of a `.ts` or `.union` file.
    Validate { input: PathBuf },
    /// Report manifoldness, degree and linearity.
    Classify { input: PathBuf },
    /// Decide the state separation property.
    CheckSsp { input: PathBuf },
    /// Decide the event/state separation property.
    CheckEssp { input: PathBuf },
    /// Decide feasibility (ESSP and SSP).
    CheckFeasible { input: PathBuf },
    /// Separate chain positions `i < j` of a linear 2-fold system.
    Separator { input: PathBuf, i: usize, j: usize },
    /// Decide the SSP of a linear 2-fold system in polynomial time.
    Linear2Ssp { input: PathBuf },
    /// Synthesize an elementary net system from a transition system.
    Synthesize {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = RegionSet::Witness)]
        regions: RegionSet,
        /// Write the `.ens` here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fail unless the reachability graph is isomorphic to the input.
        #[arg(long)]
        verify: bool,
    },
    /// Print the reachability graph of a `.ens` net as a `.ts`.
    ReachGraph { input: PathBuf },
    /// Generate a reduction instance.
    Reduce {
        #[arg(long, value_parser = parse_construction)]
        construction: Construction,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Accept formulas that are not cubic monotone (scaffolding).
        #[arg(long)]
        unchecked: bool,
    },
    /// List the one-in-three models of a `.cnf3` formula.
    Models { input: PathBuf },
    /// Export a `.ts`, `.union` or `.ens` file as a DOT digraph.
    ExportDot {
        input: PathBuf,
        /// Comma-separated states of a region to shade.
        #[arg(long)]
        highlight: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded random corpus of `.ts` files.
    Corpus {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Largest state count of a generated system.
        #[arg(long, default_value_t = 8, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
        states: usize,
        #[arg(long, value_enum, default_value_t = CorpusKind::General)]
        kind: CorpusKind,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_construction(s: &str) -> Result<Construction, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Construction::ALL.iter().map(|c| c.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn emit(report: &Report, format: Format) {
    match format {
        Format::Text => print!("{}", report.text),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report.json).expect("reports are plain JSON")
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(report) => {
            emit(&report, cli.global.format);
            ExitCode::from(report.code)
        }
        Err(err) => {
            eprintln!("regionsynth: {err}");
            ExitCode::from(err.code())
        }
    }
}
