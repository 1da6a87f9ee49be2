//! Command-line front end: argument parsing, config files, parallel grid
//! evaluation and CSV/JSON emission on top of `cekit-core`.

use std::ffi::OsString;
use std::path::PathBuf;

use cekit_core::finitekey::DepsExponent;
use cekit_core::game::ResourceKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

pub mod audit;
mod commands;
pub mod config;
pub mod output;
pub mod transcript;

use output::Format;

/// Exit status for a run that completed but aborted or produced an
/// infeasible result.
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "cekit",
    version,
    about = "Coherence Equality game bounds, randomness certification and key-rate analysis"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Optimal winning probability per resource class over a d_eps grid.
    Bounds(BoundsArgs),
    /// Entanglement entropy of the optimal entangled state over a d_eps grid.
    Entropy(EntropyArgs),
    /// Guessing probability / min-entropy curves and the interpolated surface.
    Randomness(RandomnessArgs),
    /// Simulate protocol rounds and write the transcript.
    Simulate(SimulateArgs),
    /// Finite-size key length from a transcript or from raw statistics.
    Keyrate(Box<KeyrateArgs>),
    /// Formula audit and oracle-agreement battery.
    Audit(AuditArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed; every random stream is derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path (`-` or absent: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Read further flags from a `key = value` file; command-line flags win.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Solver {
    /// Random see-saw starts per optimisation.
    #[arg(long, default_value_t = 32)]
    pub starts: usize,
    /// See-saw convergence tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Maximum see-saw rounds per start.
    #[arg(long, default_value_t = 500)]
    pub max_rounds: usize,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// `start:end:step` grid of d_eps values.
    #[arg(long, default_value = "0:1:0.02")]
    pub deps_grid: String,
    /// Comma-separated resource classes.
    #[arg(long, value_delimiter = ',', default_value = "entangled,separable,mixed")]
    pub families: Vec<ResourceKind>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct EntropyArgs {
    #[arg(long, default_value = "0:1:0.02")]
    pub deps_grid: String,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct RandomnessArgs {
    /// Comma-separated d_eps values (one curve each).
    #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.05,0.1,0.2,0.5")]
    pub deps_values: Vec<f64>,
    /// Winning-probability targets per curve, from 1/2 to the optimum.
    #[arg(long, default_value_t = 11)]
    pub points: usize,
    /// Also write the fitted min-entropy surface (JSON) here.
    #[arg(long)]
    pub surface_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Number of rounds.
    #[arg(long, default_value_t = 100_000)]
    pub m: usize,
    /// Single-detection level of the honest optimal source.
    #[arg(long, default_value_t = 0.0)]
    pub deps: f64,
    /// Fraction of detection rounds revealed for testing.
    #[arg(long, default_value_t = 0.05)]
    pub gamma: f64,
    /// Weight of the source state against white noise.
    #[arg(long, default_value_t = 1.0)]
    pub visibility: f64,
    #[arg(long, default_value_t = 1.0)]
    pub efficiency_a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub efficiency_b: f64,
    #[arg(long, default_value_t = 0.0)]
    pub dark_a: f64,
    #[arg(long, default_value_t = 0.0)]
    pub dark_b: f64,
    /// Abort threshold applied when writing estimates.
    #[arg(long, default_value_t = 0.01)]
    pub eta: f64,
    /// Write the estimates (JSON) here.
    #[arg(long)]
    pub estimates_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct KeyrateArgs {
    /// Transcript CSV (`-`: stdin). Read from stdin when no raw statistics
    /// are given.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    /// Raw statistics: observed winning fraction.
    #[arg(long)]
    pub pwin: Option<f64>,
    /// Raw statistics: observed single-detection fraction on the test set.
    #[arg(long)]
    pub deps: Option<f64>,
    /// Raw statistics: size of the detection set.
    #[arg(long = "D", value_name = "D")]
    pub d_size: Option<usize>,
    /// Raw statistics: number of rounds (default 4 |D|).
    #[arg(long)]
    pub m: Option<usize>,
    /// Raw statistics: observed test-set error rate.
    #[arg(long, default_value_t = 0.0)]
    pub eta_b: f64,
    #[arg(long, default_value_t = 0.05)]
    pub gamma: f64,
    /// Abort threshold on the test-set error rate.
    #[arg(long, default_value_t = 0.01)]
    pub eta: f64,
    /// Target failure probability.
    #[arg(long, default_value_t = 1e-6)]
    pub mu: f64,
    /// Slacks (default m^(-1/3) each).
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub eps_prime: Option<f64>,
    #[arg(long)]
    pub delta_prime: Option<f64>,
    /// Reconciliation failure (default mu/4).
    #[arg(long)]
    pub eps_ir: Option<f64>,
    /// Privacy-amplification parameter (default mu/4).
    #[arg(long)]
    pub eps_pa: Option<f64>,
    /// Largest attainable winning probability (default: optimum at the
    /// observed d_eps).
    #[arg(long)]
    pub max_pwin: Option<f64>,
    #[arg(long, value_enum, default_value = "standard")]
    pub deps_exponent: ExponentArg,
    /// Search the slacks for the longest feasible key.
    #[arg(long)]
    pub tune: bool,
    /// Evaluate the key at this adjusted winning probability instead of the
    /// one derived from the estimates.
    #[arg(long)]
    pub pwin_tilde: Option<f64>,
    /// Min-entropy surface (JSON from `randomness --surface-out`); computed
    /// when absent.
    #[arg(long)]
    pub surface: Option<PathBuf>,
    #[arg(long)]
    pub surface_out: Option<PathBuf>,
    /// Largest d_eps column of a computed surface (default: just above the
    /// largest d_eps queried).
    #[arg(long)]
    pub surface_dmax: Option<f64>,
    #[arg(long, default_value_t = 6)]
    pub surface_columns: usize,
    #[arg(long, default_value_t = 8)]
    pub surface_points: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ExponentArg {
    Standard,
    Quartered,
}

impl From<ExponentArg> for DepsExponent {
    fn from(e: ExponentArg) -> Self {
        match e {
            ExponentArg::Standard => DepsExponent::Standard,
            ExponentArg::Quartered => DepsExponent::Quartered,
        }
    }
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    /// Angle spacing (radians) of the brute-force grid.
    #[arg(long, default_value_t = 0.01)]
    pub resolution: f64,
    /// Simulated runs for the empirical concentration check.
    #[arg(long, default_value_t = 10_000)]
    pub runs: usize,
    /// Rounds per simulated run.
    #[arg(long, default_value_t = 1_000)]
    pub rounds: usize,
    /// Random parameter points per audited formula.
    #[arg(long, default_value_t = 5)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub common: Common,
}

/// Error that should produce the usage exit status.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Outcome of a subcommand that ran to completion.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Completed, but aborted, infeasible or an audit check failed.
    Failed,
}

fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<cekit_core::Error>() {
            return match e {
                cekit_core::Error::InvalidParameter { .. }
                | cekit_core::Error::GridTooSparse(_)
                | cekit_core::Error::OutsideDomain { .. } => EXIT_USAGE,
                _ => EXIT_FAILURE,
            };
        }
    }
    EXIT_FAILURE
}

fn init_threads() {
    if let Some(n) = std::env::var("CEKIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if the pool already exists (repeated in-process calls).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    init_threads();
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match config::expand(&Cli::command(), args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match commands::run(cli.command) {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::Failed) => EXIT_FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
