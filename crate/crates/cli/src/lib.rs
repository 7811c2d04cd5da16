//! Command-line driver: `sparsify`, `verify` and `diagnose`.
//!
//! Exit codes: 0 on success, 1 for unreadable or malformed input, 2 for
//! contract violations (inconsistent dimensions, out-of-range parameters).

pub mod expect;
pub mod manifest;

mod commands;

use clap::{Args, Parser, Subcommand};
use quadfreq::analysis::Family;
use quadfreq::quad::{Mode, QuadPatterns};
use quadfreq::sparsify::StopRule;
use quadfreq::weights::Perturb;
use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "quadfreq", version, about = "Sparse TSP candidate graphs from frequency quadrilaterals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prune an instance's complete graph down to a sparse candidate graph.
    Sparsify(SparsifyArgs),
    /// Count tour edges missing from an edge-list graph.
    Verify(VerifyArgs),
    /// Compare observed frequency statistics with the 5/3/1 model on small random instances.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
pub struct SparsifyArgs {
    /// TSPLIB instance file.
    #[arg(long, required_unless_present = "from_report")]
    pub instance: Option<PathBuf>,
    /// Optimal tour file; enables lost-edge counts.
    #[arg(long)]
    pub tour: Option<PathBuf>,
    /// Target sparsity: stop before fewer than c*n edges remain [default: ceil(log2 n)].
    #[arg(long)]
    pub c: Option<f64>,
    /// `exhaustive` or `sampled:<N>:<seed>`.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    /// `on:<seed>` or `off` [default: on:0 for EXPLICIT instances, off otherwise].
    #[arg(long, value_parser = parse_perturb)]
    pub perturb: Option<Perturb>,
    /// Prunes to run after the n_below rule fires.
    #[arg(long)]
    pub extra_cycles: Option<usize>,
    /// Comma-separated subset of n_below_rule, edge_target, k_max_cap.
    #[arg(long, value_delimiter = ',', value_parser = parse_rule)]
    pub stop_rules: Option<Vec<StopRule>>,
    /// First cycle that scores incomplete quadrilaterals.
    #[arg(long)]
    pub activation_cycle: Option<usize>,
    /// complete_only, missing_one_or_cycle or any_four_edges.
    #[arg(long, value_parser = parse_patterns)]
    pub incomplete_patterns: Option<QuadPatterns>,
    /// Re-run the configuration echoed in an earlier report.json.
    #[arg(
        long,
        conflicts_with_all = [
            "instance", "tour", "c", "mode", "perturb", "extra_cycles",
            "stop_rules", "activation_cycle", "incomplete_patterns",
        ]
    )]
    pub from_report: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "quadfreq-out")]
    pub out: PathBuf,
    /// Write only the output graph's edge list.
    #[arg(long)]
    pub final_only: bool,
    /// Reference tables (JSON) to compare against.
    #[arg(long)]
    pub expect: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Edge-list file (`u v [distance [fbar]]`, 1-indexed).
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub tour: PathBuf,
    /// Instance the tour belongs to; checks dimensions.
    #[arg(long)]
    pub instance: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Vertices per random instance (at most 12).
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub samples_per_edge: u32,
    /// euclidean or uniform.
    #[arg(long, default_value = "euclidean", value_parser = parse_family)]
    pub family: Family,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    if s == "exhaustive" {
        return Ok(Mode::Exhaustive);
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["sampled", n, seed] => {
            let per_edge: u32 = n.parse().map_err(|_| format!("bad sample count {n:?}"))?;
            if per_edge == 0 {
                return Err("sample count must be positive".into());
            }
            let seed = seed.parse().map_err(|_| format!("bad seed {seed:?}"))?;
            Ok(Mode::Sampled { per_edge, seed })
        }
        _ => Err(format!("expected `exhaustive` or `sampled:<N>:<seed>`, got {s:?}")),
    }
}

fn parse_perturb(s: &str) -> Result<Perturb, String> {
    match s.split_once(':') {
        None if s == "off" => Ok(Perturb::Off),
        Some(("on", seed)) => seed.parse().map(Perturb::on).map_err(|_| format!("bad seed {seed:?}")),
        _ => Err(format!("expected `on:<seed>` or `off`, got {s:?}")),
    }
}

fn parse_rule(s: &str) -> Result<StopRule, String> {
    StopRule::parse(s).ok_or_else(|| format!("unknown stop rule {s:?}"))
}

fn parse_patterns(s: &str) -> Result<QuadPatterns, String> {
    QuadPatterns::parse(s).ok_or_else(|| format!("unknown pattern set {s:?}"))
}

fn parse_family(s: &str) -> Result<Family, String> {
    match s {
        "euclidean" => Ok(Family::Euclidean),
        "uniform" => Ok(Family::Uniform),
        _ => Err(format!("unknown family {s:?}")),
    }
}

/// A failed command and its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or malformed input (exit 1).
    Input(String),
    /// Inconsistent inputs or parameters (exit 2).
    Contract(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Contract(_) => 2,
        }
    }

    /// Classifies a library error raised while handling `context`.
    pub fn from_core(context: impl fmt::Display, e: quadfreq::Error) -> Self {
        let msg = format!("{context}: {e}");
        if e.is_contract_violation() || matches!(e, quadfreq::Error::TooFewVertices(_)) {
            Failure::Contract(msg)
        } else {
            Failure::Input(msg)
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Contract(m) => f.write_str(m),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Sparsify(a) => commands::sparsify(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Diagnose(a) => commands::diagnose(&a),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {f}");
            f.code()
        }
    }
}

/// Caps the global worker pool at `QUADFREQ_THREADS` when set.
fn configure_threads() {
    if let Some(n) = std::env::var("QUADFREQ_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // Fails only if the pool already exists, e.g. on a second call in-process.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

pub use commands::{diagnostics_text, summary};

/// Runs `cfg` on an in-memory instance and returns the manifest that
/// `sparsify` would write, plus the full run.
pub fn sparsify_to_manifest(
    instance_path: &str,
    inst: &quadfreq::Instance,
    tour_path: Option<&str>,
    tour: Option<&quadfreq::Tour>,
    cfg: &quadfreq::sparsify::SparsifyConfig,
    expected: Option<&expect::ExpectedTables>,
) -> quadfreq::Result<(manifest::RunManifest, quadfreq::sparsify::RunOutcome)> {
    commands::execute(instance_path, inst, tour_path, tour, cfg, expected)
}
