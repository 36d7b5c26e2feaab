//! `qtransfer`: corpus generation, donor database builds, transfer
//! experiments, noise sweeps and reports. Commands only talk to each other
//! through the files they write.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration or input error,
//! 3 infeasible graph generation, 4 a graph exceeds a simulator or oracle cap.

mod artifact;
mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qtransfer::embed::EmbeddingMethod;

#[derive(Parser)]
#[command(name = "qtransfer", version = artifact::VERSION, about = "QAOA MaxCut parameter transfer pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph corpus (parity-stratified random, regular or Watts-Strogatz).
    Generate(GenerateArgs),
    /// Exact MaxCut of one graph.
    Solve(SolveArgs),
    /// Multistart QAOA optimization of one graph.
    Optimize(OptimizeArgs),
    /// Train an embedding on a corpus and build the donor database.
    Build(BuildArgs),
    /// Nearest and farthest donor evaluation for each acceptor.
    Transfer(TransferArgs),
    /// Optimization-budget regimes against transferred parameters.
    Speedup(SpeedupArgs),
    /// Noisy energies of transferred (or natively optimized) parameters.
    Noise(NoiseArgs),
    /// Aggregate transfer, speed-up and noise outputs.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphClass {
    Random,
    Regular,
    Ws,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Graph2vec,
    Gl2vec,
    Sf,
    Feather,
}

impl From<MethodArg> for EmbeddingMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Graph2vec => EmbeddingMethod::Graph2Vec,
            MethodArg::Gl2vec => EmbeddingMethod::Gl2Vec,
            MethodArg::Sf => EmbeddingMethod::Sf,
            MethodArg::Feather => EmbeddingMethod::Feather,
        }
    }
}

// Output locations are left out of the recorded configuration so that a
// rerun into another path is byte-identical.
#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    /// Node counts; one block of graphs per value.
    #[arg(long, value_delimiter = ',', default_value = "14")]
    pub n: Vec<usize>,
    #[arg(long, value_enum, default_value_t = GraphClass::Random)]
    pub class: GraphClass,
    /// Random class: graphs per parity class and node count.
    #[arg(long, default_value_t = 50)]
    pub per_class: usize,
    /// Regular and Watts-Strogatz classes: graphs per node count.
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub max_degree: usize,
    /// Degree of regular graphs.
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    /// Watts-Strogatz lattice degree.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Watts-Strogatz rewiring probability.
    #[arg(long, default_value_t = 0.1)]
    pub rewire: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SolveArgs {
    /// Graph JSON file or corpus.
    pub graph: PathBuf,
    /// Which graph of a corpus to solve.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long, default_value_t = qtransfer::maxcut::DEFAULT_ORACLE_CAP)]
    pub cap: usize,
    /// Write here instead of standard output.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct OptimizeArgs {
    pub graph: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    #[arg(long, default_value_t = 10)]
    pub starts: usize,
    /// Evaluations per start; defaults to 400p.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = qtransfer::qaoa::DEFAULT_SIMULATOR_CAP)]
    pub cap: usize,
    /// Zero wall times so reruns are byte-identical.
    #[arg(long)]
    pub deterministic: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct BuildArgs {
    #[arg(long)]
    pub corpus: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Graph2vec)]
    pub method: MethodArg,
    /// Doc-vector size, or spectrum length for SF.
    #[arg(long)]
    pub dims: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    #[arg(long, default_value_t = 10)]
    pub starts: usize,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub db: PathBuf,
    /// Embedding model path; defaults to the database path with `.model.json`.
    #[arg(long)]
    #[serde(skip)]
    pub model: Option<PathBuf>,
    /// Thread count; doc-vector training stays sequential unless this is set
    /// above 1 without `--deterministic`.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct TransferArgs {
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, required = true)]
    pub acceptors: Vec<PathBuf>,
    /// Only evaluate each donor's best record.
    #[arg(long)]
    pub best_only: bool,
    /// Also optimize each acceptor natively for the `r_native` column.
    #[arg(long)]
    pub native: bool,
    #[arg(long, default_value_t = 10)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub deterministic: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SpeedupArgs {
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, required = true)]
    pub acceptors: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct NoiseArgs {
    /// Donor database for transferred parameters; without it each acceptor
    /// is optimized natively.
    #[arg(long)]
    pub db: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, required = true)]
    pub acceptors: Vec<PathBuf>,
    /// Depth for native optimization.
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    #[arg(long, default_value_t = 10)]
    pub starts: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    pub scale: Vec<f64>,
    #[arg(long, default_value_t = qtransfer::noise::DEFAULT_TRAJECTORIES)]
    pub traj: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub p1: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub p2: f64,
    #[arg(long, default_value_t = 2e-2)]
    pub p_ro: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory for `rows.csv`, `summary_abs.csv` and `summary_rel.csv`.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct ReportArgs {
    #[arg(long)]
    pub transfer: Vec<PathBuf>,
    #[arg(long)]
    pub speedup: Vec<PathBuf>,
    /// Noise `rows.csv` files.
    #[arg(long)]
    pub noise: Vec<PathBuf>,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use qtransfer::Error;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::CapExceeded { .. } => 4,
                Error::Unreachable { .. } | Error::Infeasible(_) | Error::InvalidParity { .. } => 3,
                Error::Io(_) => 1,
                _ => 2,
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() || cause.downcast_ref::<csv::Error>().is_some() {
            return 2;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
    }
    2
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Optimize(a) => commands::optimize(&a),
        Command::Build(a) => commands::build(&a),
        Command::Transfer(a) => commands::transfer(&a),
        Command::Speedup(a) => commands::speedup(&a),
        Command::Noise(a) => commands::noise(&a),
        Command::Report(a) => report::report(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
