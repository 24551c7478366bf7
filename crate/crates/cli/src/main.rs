//! `neumann-place`: global placement, field maps, and solver comparisons.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Thread count for the worker pool; defaults to all cores.
pub const THREADS_ENV: &str = "NEUMANN_PLACE_THREADS";

#[derive(Parser)]
#[command(name = "neumann-place", version, about = "Electrostatic global placement with an analytical Neumann Poisson solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Global placement, legalization, and detailed placement of one circuit.
    Place(PlaceArgs),
    /// Density, potential, and field maps of a placement.
    Field(FieldArgs),
    /// Every solver on every input, tabulated with normalized ratios.
    Compare(CompareArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Layout {
    /// Cells clustered around the region center, as generated.
    Center,
    /// Cells clustered near the lower-left corner.
    Corner,
}

#[derive(Args, Clone, Debug)]
pub struct InputArgs {
    /// Bookshelf `.aux` file.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub input: Option<PathBuf>,
    /// Generate a synthetic circuit with this many cells.
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Net count of the synthetic circuit (default 1.2 per cell).
    #[arg(long, requires = "synthetic")]
    pub nets: Option<usize>,
    /// Starting layout of the synthetic cells.
    #[arg(long, value_enum, default_value_t = Layout::Center)]
    pub layout: Layout,
    /// Target density override for Bookshelf inputs.
    #[arg(long)]
    pub target_density: Option<f64>,
}

#[derive(Args, Clone, Debug, Default)]
pub struct SolverArgs {
    /// analytic-fast, spectral-baseline, or exact-series.
    #[arg(long)]
    pub solver: Option<String>,
    /// Bins per side (power of two).
    #[arg(long)]
    pub bins: Option<usize>,
    /// Series order of the exact-series solver.
    #[arg(long = "K")]
    pub k: Option<usize>,
}

#[derive(Args, Clone, Debug, Default)]
pub struct PlacerArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Target overflow ratio.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Wirelength smoothing length.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Initial penalty factor.
    #[arg(long)]
    pub lambda0: Option<f64>,
    /// Penalty growth per iteration.
    #[arg(long = "lambda-growth")]
    pub lambda_growth: Option<f64>,
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    /// Fraction of whitespace covered by fillers.
    #[arg(long = "filler-ratio")]
    pub filler_ratio: Option<f64>,
    /// `key = value` configuration file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlaceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub placer: PlacerArgs,
    /// Directory for placements, trace, and report.
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    /// Also write the series coefficients of the final global placement.
    #[arg(long = "dump-coeffs")]
    pub dump_coeffs: bool,
    /// Add a wall-clock column to the trace.
    #[arg(long = "trace-timing")]
    pub trace_timing: bool,
}

#[derive(Args, Debug)]
pub struct FieldArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// `.pl` file with the positions to analyse (default: the input's own).
    #[arg(long)]
    pub placement: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Compute two solvers and write their residual maps.
    #[arg(long, num_args = 2, value_names = ["SOLVER_A", "SOLVER_B"])]
    pub diff: Option<Vec<String>>,
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long = "dump-coeffs")]
    pub dump_coeffs: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Bookshelf `.aux` files; repeatable.
    #[arg(long = "input", conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub inputs: Vec<PathBuf>,
    /// Synthetic circuits of this many cells, one per seed.
    #[arg(long)]
    pub synthetic: Option<usize>,
    #[arg(long, requires = "synthetic")]
    pub nets: Option<usize>,
    /// Comma-separated seeds of the synthetic suite.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub seeds: Vec<u64>,
    /// Comma-separated solvers; the first is the normalization reference.
    #[arg(long, value_delimiter = ',', default_value = "analytic-fast,spectral-baseline")]
    pub solvers: Vec<String>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[command(flatten)]
    pub placer: PlacerArgs,
    /// Directory for the comparison CSV.
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().map_err(|e| anyhow::anyhow!("{THREADS_ENV}={v}: {e}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| match cli.command {
        Command::Place(a) => commands::place(&a),
        Command::Field(a) => commands::field(&a),
        Command::Compare(a) => commands::compare(&a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
