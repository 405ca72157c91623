use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ipqp::{LinearStrategy, Method, Precision, TraceLevel};

#[derive(Debug, Parser)]
#[command(name = "ipqp", version, about = "Interior-point QP solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem.
    Solve(SolveArgs),
    /// Solve one problem with both the explicit and the implicit method.
    Compare(CompareArgs),
    /// Sweep the forcing term θ over a set of problems and write CSV rows.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Problem file (.qps, .mps, .json) or `builtin:<name>`.
    #[arg(long)]
    pub problem: String,
    #[arg(long, default_value = "direct")]
    pub linsolve: LinearStrategy,
    #[arg(long, default_value = "f64")]
    pub precision: Precision,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    /// Forcing term; only valid with `--linsolve inexact`.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value = "on")]
    pub equilibrate: OnOff,
    #[arg(long, env = "IPQP_TRACE_LEVEL", default_value = "basic")]
    pub trace_level: TraceLevel,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = "implicit")]
    pub method: Method,
    /// Trace file; `.csv` selects CSV, anything else JSON lines.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Solution JSON file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Trace file name; `.explicit` and `.implicit` are inserted before
    /// the extension.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Solution file name, split the same way as `--trace`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Directory of problem files, or a comma-separated list of problems.
    #[arg(long)]
    pub problems: String,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub theta_sweep: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value = "on")]
    pub equilibrate: OnOff,
    /// CSV output file.
    #[arg(long, default_value = "bench.csv")]
    pub out: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}
