use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "sdnplace", version, about = "SDN controller placement for satellite-terrestrial networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a topology and print its size.
    Inspect(InspectArgs),
    /// Sample one failure draw and place controllers.
    Solve(SolveArgs),
    /// Solve, then check the placement's control paths by simulation.
    Simulate(SimulateArgs),
    /// Run repeated trials and write trials.csv and summary.csv.
    Experiment(ExperimentArgs),
    /// Repeated trials over several alphas.
    Sweep(ExperimentArgs),
    /// Exact versus greedy gaps over repeated trials.
    Compare(ExperimentArgs),
}

#[derive(Debug, Args, Default)]
pub struct TopologyArgs {
    /// Topology Zoo GraphML file.
    #[arg(long, value_name = "FILE")]
    pub topology: Option<PathBuf>,

    /// Missing coordinates policy.
    #[arg(long, value_name = "POLICY", value_parser = ["impute", "drop", "reject"])]
    pub missing_coordinates: Option<String>,

    /// Gateway node names, inline (comma separated) or a file with one per line.
    #[arg(long, value_name = "LIST|FILE", conflicts_with = "gateway_count")]
    pub gateways: Option<String>,

    /// Choose this many gateways with the k-median fallback.
    #[arg(long, value_name = "N")]
    pub gateway_count: Option<usize>,

    /// Candidate node names (comma separated); every node by default.
    #[arg(long, value_name = "LIST")]
    pub candidates: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// Path selection: exact-reliable or yen-k:K.
    #[arg(long, value_name = "MODE")]
    pub mode: Option<String>,

    /// Shorthand for --mode yen-k:K.
    #[arg(long, value_name = "K", conflicts_with = "mode")]
    pub k: Option<usize>,

    /// Which path nodes count toward the error rate.
    #[arg(long, value_name = "WHICH", value_parser = ["intermediate", "all"])]
    pub counting: Option<String>,

    /// Charge a gateway switch's satellite link on its control path.
    #[arg(long)]
    pub satellite_hop: bool,

    /// Greedy probability rule.
    #[arg(long, value_name = "RULE", value_parser = ["standard", "inverted-losses"])]
    pub greedy_rule: Option<String>,

    /// Largest candidate count the exact solver accepts.
    #[arg(long, value_name = "N")]
    pub exact_limit: Option<usize>,

    /// Disable branch-and-bound pruning in the exact solver.
    #[arg(long)]
    pub no_prune: bool,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub topo: TopologyArgs,

    /// Human-readable output.
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub topo: TopologyArgs,

    #[command(flatten)]
    pub model: ModelArgs,

    /// Solve a saved instance bundle instead of a topology.
    #[arg(long, value_name = "DIR", conflicts_with_all = ["topology", "gateways", "gateway_count"])]
    pub instance: Option<PathBuf>,

    /// Failure case: 1..4 or none.
    #[arg(long, default_value = "1")]
    pub case: String,

    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    #[arg(long, value_parser = ["exact", "greedy"], default_value = "exact")]
    pub solver: String,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Also write result.csv, failures.csv and the instance bundle here.
    #[arg(long, value_name = "DIR", env = "SDNPLACE_OUT")]
    pub out: Option<PathBuf>,

    /// Record wall-clock time instead of NA.
    #[arg(long)]
    pub timings: bool,

    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub solve: SolveArgs,

    /// Samples per control path.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// key = value configuration file; flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub topo: TopologyArgs,

    #[command(flatten)]
    pub model: ModelArgs,

    /// Failure cases, comma separated (1..4 or none).
    #[arg(long, value_name = "LIST")]
    pub case: Option<String>,

    /// Alpha values, comma separated.
    #[arg(long, value_name = "LIST")]
    pub alpha: Option<String>,

    /// Solvers, comma separated (exact, greedy).
    #[arg(long, value_name = "LIST")]
    pub solver: Option<String>,

    #[arg(long)]
    pub repeats: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker threads; output does not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,

    /// Output directory; without one the main table goes to stdout.
    #[arg(long, value_name = "DIR", env = "SDNPLACE_OUT")]
    pub out: Option<PathBuf>,

    /// Also write gnuplot .dat tables.
    #[arg(long)]
    pub dat: bool,

    #[arg(long)]
    pub timings: bool,

    #[arg(long)]
    pub pretty: bool,
}
