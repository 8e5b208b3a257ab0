//! `surprisal`: Moran's I, its analytic permutation law, permutation
//! sampling, synthetic sweeps and raster patch ranking from the command line.
//!
//! Machine-readable JSON goes to stdout; tables and diagnostics go to
//! stderr. Exit codes: 0 success, 1 I/O or format error, 2 degenerate
//! input, 3 infeasible configuration.

mod commands;
mod manifest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spatial_surprisal::analytic::TailSide;
use spatial_surprisal::graph::{Contiguity, Topology};
use spatial_surprisal::rng::DEFAULT_SEED;

#[derive(Debug, Parser)]
#[command(name = "surprisal", version, about = "Spatial self-information of discrete-valued grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Moran's I, unscaled I and pair counts of a grid file.
    Moran(MoranArgs),
    /// Approximate mean and variance of the unscaled statistic for a value scheme.
    Analytic(AnalyticArgs),
    /// Permutation samples of the unscaled statistic.
    Sample(SampleArgs),
    /// Synthetic robustness sweeps.
    Sweep(SweepArgs),
    /// Tile a raster, score every patch and rank them.
    Raster(RasterArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InputFormat {
    Csv,
    FlatBinary,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum Corrections {
    None,
    Delta,
    Common,
    #[default]
    All,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value = "rook")]
    pub contiguity: Contiguity,
    /// Wrap-around neighbours.
    #[arg(long, conflicts_with = "bounded")]
    pub torus: bool,
    /// Borders lose neighbours (default).
    #[arg(long)]
    pub bounded: bool,
}

impl GridArgs {
    pub fn topology(&self) -> Topology {
        if self.torus {
            Topology::Torus
        } else {
            Topology::Bounded
        }
    }
}

#[derive(Debug, Args)]
pub struct MoranArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: InputFormat,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    /// JSON list of [value, count] pairs.
    #[arg(long, required_unless_present = "from_grid", conflicts_with = "from_grid")]
    pub scheme: Option<PathBuf>,
    /// Take the scheme (and, unless given, k, Δ_N and the observed value) from a grid file.
    #[arg(long)]
    pub from_grid: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: InputFormat,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Nominal neighbour count.
    #[arg(long)]
    pub k: Option<f64>,
    /// Actual minus nominal directed edge count.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_n: Option<i64>,
    #[arg(long, value_enum, default_value = "none")]
    pub corrections: Corrections,
    /// Observed unscaled statistic at which to evaluate J and the tail probability.
    #[arg(long, allow_hyphen_values = true)]
    pub observed: Option<f64>,
    #[arg(long, default_value = "two")]
    pub tail: TailSide,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub scheme: PathBuf,
    /// ROWSxCOLS, e.g. 40x40.
    #[arg(long, value_parser = commands::parse_shape)]
    pub grid_shape: (usize, usize),
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = commands::default_workers())]
    pub workers: usize,
    /// Law used for the KL/KS summary.
    #[arg(long, value_enum, default_value = "all")]
    pub corrections: Corrections,
    /// CSV file for the raw samples.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SweepName {
    Independence,
    Perturb,
    Systematic,
    CommonNeighbor,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub kind: SweepName,
    /// Sweep configuration JSON, or a manifest from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,
    #[arg(long, default_value_t = commands::default_workers())]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RankBy {
    MoranI,
    SelfInformation,
}

#[derive(Debug, Args)]
pub struct RasterArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: InputFormat,
    #[arg(long)]
    pub tile: usize,
    #[arg(long)]
    pub patch: usize,
    #[arg(long)]
    pub bin_width: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub origin: f64,
    #[arg(long)]
    pub domain_max: Option<f64>,
    #[arg(long, default_value = "rook")]
    pub contiguity: Contiguity,
    #[arg(long, value_enum, default_value = "self-information")]
    pub rank_by: RankBy,
    /// LO,HI bounds on the background proportion.
    #[arg(long, value_parser = commands::parse_range)]
    pub b_range: Option<(f64, f64)>,
    #[arg(long, default_value = "two")]
    pub tail: TailSide,
    /// CSV file for all patch reports in tiling order.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = commands::default_workers())]
    pub workers: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Moran(a) => commands::moran(&a),
        Command::Analytic(a) => commands::analytic(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Raster(a) => commands::raster(&a),
    };
    match result {
        Ok(json) => {
            // a closed pipe (e.g. `| head`) is not an error worth reporting
            let _ = writeln!(std::io::stdout().lock(), "{json}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
