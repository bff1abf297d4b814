//! `hekan`: fit activations and layers, run plaintext or encrypted KAN
//! inference, and benchmark the naive and lazy packing paths.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hekan_core::approx::ComparatorMode;
use hekan_core::inference::PathKind;
use hekan_core::Error;

#[derive(Parser, Debug)]
#[command(name = "hekan", version, about = "KAN inference over a simulated SIMD-HE backend")]
pub struct Cli {
    /// Seed for noise and synthetic models; overrides the backend file's
    /// `rng_seed` when set.
    #[arg(long, global = true, env = "HEKAN_SEED")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit a SiLU polynomial on a range derived from samples or (mu, sigma).
    FitActivation(FitActivationArgs),
    /// Least-squares fit of a single KAN layer from a CSV dataset.
    FitLayer(FitLayerArgs),
    /// Run a model on CSV inputs.
    Infer(InferArgs),
    /// Count operations for lazy and naive paths over a list of configs.
    Bench(BenchArgs),
    /// Run plain-exact, plain-mirrored and HE on the same inputs and diff them.
    Compare(CompareArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Wls,
    Ols,
    Remez,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    PlainExact,
    PlainMirrored,
    He,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Lazy,
    Naive,
}

impl From<PathArg> for PathKind {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Lazy => PathKind::Lazy,
            PathArg::Naive => PathKind::Naive,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ComparatorArg {
    Composite,
    Exact,
}

impl From<ComparatorArg> for ComparatorMode {
    fn from(c: ComparatorArg) -> Self {
        match c {
            ComparatorArg::Composite => ComparatorMode::Composite,
            ComparatorArg::Exact => ComparatorMode::Exact,
        }
    }
}

#[derive(Args, Debug)]
pub struct FitActivationArgs {
    /// CSV of activation inputs (all numeric cells are used).
    #[arg(long, conflicts_with_all = ["mu", "sigma"], required_unless_present_all = ["mu", "sigma"])]
    pub samples: Option<PathBuf>,
    #[arg(long, requires = "sigma", allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, requires = "mu")]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub degree: usize,
    #[arg(long, value_enum, default_value_t = Method::Wls)]
    pub method: Method,
    /// Range half-width in sigmas.
    #[arg(long, default_value_t = 5.0)]
    pub factor: f64,
    /// Clamp the range to [-bound, bound].
    #[arg(long)]
    pub bound: Option<f64>,
    /// Polynomial JSON; the error report goes next to it as `<stem>.report.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitLayerArgs {
    /// CSV rows of inputs followed by `targets` target columns.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub targets: usize,
    #[arg(long, default_value_t = 5)]
    pub g: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub hi: f64,
    #[arg(long, default_value_t = 10)]
    pub silu_degree: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub ridge: f64,
    /// Model JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct HeArgs {
    /// Backend config JSON (slot_count, depth_budget, noise_std, rng_seed).
    /// Without it: 2^15 slots, depth 20, no noise.
    #[arg(long)]
    pub backend: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PathArg::Lazy)]
    pub path: PathArg,
    #[arg(long, value_enum, default_value_t = ComparatorArg::Composite)]
    pub comparator: ComparatorArg,
    /// Fail instead of refreshing when a layer does not fit the remaining levels.
    #[arg(long)]
    pub no_bootstrap: bool,
}

#[derive(Args, Debug)]
pub struct InferArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// One input per CSV row.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::He)]
    pub mode: Mode,
    #[command(flatten)]
    pub he: HeArgs,
    /// Outputs and stats as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Model used by configs without a `shape`.
    #[arg(long, requires = "input")]
    pub model: Option<PathBuf>,
    /// CSV inputs for `--model`.
    #[arg(long, requires = "model")]
    pub input: Option<PathBuf>,
    /// JSON array of bench configs.
    #[arg(long)]
    pub configs: PathBuf,
    /// Report CSV (or JSON when the extension is `.json`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub he: HeArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit status for a failed run: 2 usage or shape, 3 numerical, 4 budget.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::IllConditioned(_)
            | Error::RemezNonConvergence { .. }
            | Error::CompositeSignAccuracy { .. }
            | Error::SingularSystem(_)
            | Error::InputOutOfRange { .. },
        ) => 3,
        Some(Error::DepthBudgetInfeasible(_) | Error::DepthExhausted { .. } | Error::PackingOverflow { .. }) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
