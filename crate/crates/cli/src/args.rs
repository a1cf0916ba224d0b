use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "qsl", version, about = "Minimum-time qubit gates under f(t)·H0 drives")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate the minimum gate or rotation time.
    Bound(BoundArgs),
    /// Build the fastest drive for a phase shift and verify it.
    Synthesize(SynthesizeArgs),
    /// Integrate a Hamiltonian spec and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Search for drives that beat the bound over a grid of angles.
    VerifyBound(VerifyBoundArgs),
    /// Synthesize and verify gates over a θ × energy grid.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bound(_) => "bound",
            Command::Synthesize(_) => "synthesize",
            Command::Simulate(_) => "simulate",
            Command::VerifyBound(_) => "verify-bound",
            Command::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Natural,
    Si,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchArg {
    Auto,
    Plus,
    Minus,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    /// Phase shift θ of the swap gate.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Rotation angle α in [0, π/2].
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Mean energy (natural units, or joules with `--units si`).
    #[arg(long, allow_negative_numbers = true)]
    pub energy: Option<f64>,
    #[arg(long, value_enum)]
    pub units: Option<Units>,
    /// Transition wavelength in meters; implies SI units.
    #[arg(long, allow_negative_numbers = true)]
    pub wavelength: Option<f64>,
    /// Angles are given in degrees.
    #[arg(long)]
    pub degrees: bool,
    /// Print a JSON object instead of key=value lines.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthesizeArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub energy: f64,
    #[arg(long, value_enum, default_value = "auto")]
    pub branch: BranchArg,
    /// Verification tolerance.
    #[arg(long, default_value_t = qsl_core::synthesis::DEFAULT_VERIFY_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub degrees: bool,
    /// Path of the Hamiltonian spec JSON; the report goes next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Hamiltonian spec JSON.
    #[arg(long)]
    pub spec: PathBuf,
    /// Final time.
    #[arg(long)]
    pub t: f64,
    /// Initial coefficients "a1,a2", each a complex number such as 0.6 or 0.8i.
    #[arg(long, default_value = "1,0")]
    pub state: String,
    /// Number of output rows (a single row when t = 0).
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Add RK4 oracle columns and report the largest deviation.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 8192)]
    pub steps: usize,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyBoundArgs {
    /// θ grid as start:stop:step (stop inclusive).
    #[arg(long, conflicts_with = "alpha_grid", required_unless_present = "alpha_grid")]
    pub theta_grid: Option<String>,
    /// α grid as start:stop:step (stop inclusive).
    #[arg(long)]
    pub alpha_grid: Option<String>,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 100_000)]
    pub budget: u64,
    #[arg(long)]
    pub seed: u64,
    /// Step-halving levels per refinement.
    #[arg(long, default_value_t = qsl_core::search::DEFAULT_REFINE_LEVELS)]
    pub levels: u32,
    #[arg(long)]
    pub degrees: bool,
    /// Sweep CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Append rows to an existing CSV instead of overwriting it.
    #[arg(long, requires = "out")]
    pub append: bool,
    /// Also write the full reports as a JSON array.
    #[arg(long)]
    pub reports: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub theta_grid: String,
    /// Comma-separated mean energies.
    #[arg(long, default_value = "0.5,1,2", value_delimiter = ',')]
    pub energies: Vec<f64>,
    #[arg(long, default_value_t = qsl_core::synthesis::DEFAULT_VERIFY_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub degrees: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
