use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "quic", version, about = "Sparse inverse covariance estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw a ground-truth precision matrix, samples, and their covariance.
    Generate(GenerateArgs),
    /// Solve one problem.
    Solve(SolveArgs),
    /// Time solvers over a grid of penalties and accuracies.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Chain,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Quic,
    Reference,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Quic => "quic",
            SolverKind::Reference => "reference",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct GeneratorArgs {
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub p: Option<usize>,
    /// Number of samples (default p / 2).
    #[arg(long)]
    pub n: Option<usize>,
    /// Target nonzeros of a random precision matrix (default 10 p).
    #[arg(long)]
    pub nnz: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub gen: GeneratorArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct TuningArgs {
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_outer: usize,
    /// Inner sweeps at outer iteration t are ceil(rate * (t + 1)).
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub inner_rate: f64,
    #[arg(long, default_value_t = 0.25)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long)]
    pub no_block_decomp: bool,
    /// Visit free coordinates in a fresh random order every sweep.
    #[arg(long)]
    pub permute_coords: bool,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Covariance matrix file.
    pub cov: PathBuf,
    /// Scalar penalty.
    #[arg(
        long,
        conflicts_with = "lambda_file",
        required_unless_present = "lambda_file"
    )]
    pub lambda: Option<f64>,
    /// Penalty matrix file, used as is.
    #[arg(long)]
    pub lambda_file: Option<PathBuf>,
    /// Apply a scalar --lambda to the diagonal as well.
    #[arg(long)]
    pub penalize_diagonal: bool,
    #[arg(long, value_enum, default_value_t = SolverKind::Quic)]
    pub solver: SolverKind,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// Seed for --permute-coords.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Covariance matrix file; omit to generate one with --kind and --p.
    pub cov: Option<PathBuf>,
    /// Ground-truth precision for recovery metrics when --cov is given.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub gen: GeneratorArgs,
    /// Penalties, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub lambda: Vec<f64>,
    #[arg(long)]
    pub penalize_diagonal: bool,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SolverKind::Quic, SolverKind::Reference])]
    pub solver: Vec<SolverKind>,
    /// Relative accuracies, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-6])]
    pub eps: Vec<f64>,
    /// Per-run budget in seconds; cells that miss it are marked "*".
    #[arg(long, default_value_t = 60.0)]
    pub budget: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub inner_rate: f64,
    #[arg(long, default_value_t = 0.25)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long)]
    pub no_block_decomp: bool,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}
