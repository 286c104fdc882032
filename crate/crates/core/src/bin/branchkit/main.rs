//! Command-line front end. Exit codes: 0 success, 2 usage, 3 data error,
//! 4 estimation did not converge.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use branchkit::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "branchkit", version, about = "Branching-factor estimation for noisy contact networks")]
struct Cli {
    /// Master seed for every random stream; echoed in the output metadata.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads. Output does not depend on this value.
    #[arg(long, global = true, env = "BRANCHKIT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a random graph and write it as a canonical edge list.
    Generate(GenerateArgs),
    /// Write noisy observations of a graph.
    Perturb(PerturbArgs),
    /// Degree statistics and branching factor of edge lists.
    Kappa(KappaArgs),
    /// Estimate error rates and κ from three replicate edge lists.
    Estimate(EstimateArgs),
    /// Exact moments of the observed degree sums.
    Moments(MomentsArgs),
    /// Monte Carlo bias and variance of the naive κ under noise.
    SimulateBias(SimulateBiasArgs),
    /// Monte Carlo accuracy and interval coverage of the estimator.
    SimulateCoverage(SimulateCoverageArgs),
    /// R₀ and percolation, epidemic and immunization thresholds.
    Thresholds(ThresholdsArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum Family {
    Er,
    Ba,
    Pareto,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
struct GraphArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    n: usize,
    /// Edge probability (er).
    #[arg(long)]
    p: Option<f64>,
    /// Edges per new vertex (ba).
    #[arg(long)]
    m: Option<usize>,
    /// Pareto shape (pareto).
    #[arg(long)]
    zeta: Option<f64>,
    /// Target mean degree (pareto; er when --p is absent).
    #[arg(long)]
    mean_degree: Option<f64>,
}

#[derive(Args, Debug, serde::Serialize)]
struct GenerateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Edge-list path; the sidecar goes to `<out>.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, serde::Serialize)]
struct PerturbArgs {
    #[arg(long)]
    input: PathBuf,
    /// Type-I rate; omit to use the edge-unbiased value for --beta.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 3)]
    replicates: usize,
    /// Directory for `replicate_<i>.tsv` files.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug, serde::Serialize)]
struct KappaArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Keep only records with weight above this value.
    #[arg(long)]
    weight_threshold: Option<f64>,
}

#[derive(Args, Debug, serde::Serialize)]
struct EstimateArgs {
    /// Three replicate edge lists (more are accepted; only the first three are used).
    #[arg(long, num_args = 3.., required = true)]
    replicates: Vec<PathBuf>,
    /// Fixed-point initializer; defaults to û₂.
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Bootstrap replicates for the variance.
    #[arg(long, default_value_t = 1000)]
    nb: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long)]
    weight_threshold: Option<f64>,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, serde::Serialize)]
struct MomentsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Type-I rate; omit to use the edge-unbiased value for --beta.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: f64,
}

/// Comma-separated probabilities. An alias so clap reads it as one value.
type Grid = Vec<f64>;

fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}")))
        .collect()
}

#[derive(Args, Debug, serde::Serialize)]
struct SimulateBiasArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Comma-separated Type-II rates; α is set edge-unbiased per cell.
    #[arg(long, value_parser = parse_grid, default_value = "0.1,0.2,0.3")]
    beta_grid: Grid,
    #[arg(long, default_value_t = 1000)]
    n_noisy: usize,
    #[arg(long, default_value_t = 1000)]
    bootstrap_reps: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, serde::Serialize)]
struct SimulateCoverageArgs {
    /// True network as an edge list; otherwise give a generator.
    #[arg(long, conflicts_with = "family")]
    input: Option<PathBuf>,
    #[arg(long, value_enum, requires = "n")]
    family: Option<Family>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    mean_degree: Option<f64>,
    #[arg(long, value_parser = parse_grid, default_value = "0.005,0.01")]
    alpha_grid: Grid,
    #[arg(long, value_parser = parse_grid, default_value = "0.1,0.15,0.2")]
    beta_grid: Grid,
    #[arg(long, default_value_t = 500)]
    n_trials: usize,
    #[arg(long, default_value_t = 1000)]
    nb: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, serde::Serialize)]
struct ThresholdsArgs {
    #[arg(long, required_unless_present = "estimate_json", conflicts_with = "estimate_json")]
    kappa: Option<f64>,
    /// Variance of the κ estimate; 0 when absent.
    #[arg(long, requires = "kappa")]
    variance: Option<f64>,
    /// Output of `estimate --json`, supplying κ̂ and its variance.
    #[arg(long)]
    estimate_json: Option<PathBuf>,
    /// Per-contact infection rate; R₀ needs both --theta and --gamma.
    #[arg(long, requires = "gamma")]
    theta: Option<f64>,
    #[arg(long, requires = "theta")]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
}

/// Maps library errors onto exit codes.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::UnachievableTarget { .. } | Error::DenseInfeasible { .. } => 2,
        Error::Divergence { .. }
        | Error::SingularIterate(_)
        | Error::InvalidRegion { .. }
        | Error::NonPositiveK3(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
