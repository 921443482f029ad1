//! `sdp`: solve, perturbation study and dense reference solves.
//!
//! Exit codes: 0 ok, 1 solver failure, 2 input error, 3 size limit.

mod artifacts;
mod commands;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sdp_core::audit::{self, AuditAllocator};
use sdp_core::SdpError;

#[global_allocator]
static ALLOC: AuditAllocator = AuditAllocator;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Size(String),
    Solver(String),
    Output(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Solver(_) | CliError::Output(_) => 1,
            CliError::Input(_) => 2,
            CliError::Size(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Size(m) => write!(f, "size limit: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

impl From<SdpError> for CliError {
    fn from(e: SdpError) -> Self {
        match e {
            SdpError::Format { .. } | SdpError::InvalidInput(_) | SdpError::Dimension(_) | SdpError::Io(_) => {
                CliError::Input(e.to_string())
            }
            SdpError::SizeLimit { .. } => CliError::Size(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "sdp", version, about = "Storage-optimal SDP solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dual subgradient method with scheduled primal recovery.
    Solve(SolveArgs),
    /// Recovery error against the dense reference solution under dual noise.
    Perturb(PerturbArgs),
    /// Dense reference solve with a regularity report.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// maxcut:<path> | matcomp:<path> | synthetic:<kind>[:key=value,...]
    #[arg(long)]
    pub problem: Option<String>,
    /// Graph file; shorthand for --problem maxcut:<path>.
    #[arg(long, conflicts_with_all = ["problem", "obs"])]
    pub graph: Option<PathBuf>,
    /// Observation file; shorthand for --problem matcomp:<path>.
    #[arg(long, conflicts_with = "problem")]
    pub obs: Option<PathBuf>,
    /// Seed for synthetic instances, noise directions and the eigensolver.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Recovery rank, or `auto` for the largest r with r(r+1)/2 <= m.
    #[arg(long, default_value = "auto")]
    pub rank: String,
    /// Penalty weight: a number, `trace` (1.1 x trace bound) or `search:<d>`
    /// (doubling over 2, 4, ..., 2^d). Defaults to `trace` when a trace bound
    /// is known and `search:10` otherwise.
    #[arg(long)]
    pub alpha: Option<String>,
    /// MinObj radius inflation over the MinFeas residual.
    #[arg(long, default_value_t = 1.1)]
    pub gamma: f64,
    /// 1 = MinFeas, 2 = MinFeas then MinObj.
    #[arg(long, default_value_t = 1)]
    pub option: u8,
    /// polyak | polyak:<target> | invsqrt:<eta0> | adaptive:<eta0>
    #[arg(long, default_value = "polyak")]
    pub schedule: String,
    /// Eigensolver relative residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Krylov dimension cap for the eigensolver.
    #[arg(long)]
    pub krylov_dim: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Comma-separated recovery iterations; default 10, 100, 1000, ...
    #[arg(long, value_delimiter = ',')]
    pub recover_at: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    pub time_budget: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Comma-separated noise levels.
    #[arg(long, value_delimiter = ',', default_value = "1,1e-1,1e-2,1e-3,1e-4,1e-5")]
    pub noise: Vec<f64>,
    /// Largest dimension accepted by the dense reference solver.
    #[arg(long, default_value_t = sdp_core::oracle::DEFAULT_MAX_N)]
    pub max_n: usize,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = sdp_core::oracle::DEFAULT_MAX_N)]
    pub max_n: usize,
    /// Extra solves from random starts for the uniqueness probe.
    #[arg(long, default_value_t = 2)]
    pub restarts: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    audit::enable_from_env();
    let res = match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Perturb(a) => commands::perturb(a),
        Command::Oracle(a) => commands::oracle(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sdp: {e}");
            ExitCode::from(e.code())
        }
    }
}
