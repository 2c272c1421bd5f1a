//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "tress",
    version,
    about = "Topological effective sample sizes and Monte Carlo error diagnostics for phylogenetic MCMC output"
)]
pub struct Cli {
    /// Escalate degenerate-statistics warnings to exit code 3.
    #[arg(long, global = true)]
    pub strict: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Per-chain ESS table for the requested tree ESS methods.
    Ess(EssArgs),
    /// Pairwise split-probability comparison with ESS-based confidence
    /// intervals.
    Compare(CompareArgs),
    /// Run simulated phylogenetic MCMC chains against a known target.
    Simulate(SimulateArgs),
    /// Validate ESS measures against brute-force Monte Carlo error.
    Benchmark(BenchmarkArgs),
    /// Single-chain convergence trace via block bootstrap.
    Bootstrap(BootstrapArgs),
}

#[derive(Args)]
pub struct EssArgs {
    /// Tree files, one Newick string per line.
    #[arg(long, num_args = 1.., required = true)]
    pub trees: Vec<PathBuf>,

    /// Log trace TSVs aligned with the tree files (required for logPosterior).
    #[arg(long, num_args = 1..)]
    pub log_files: Vec<PathBuf>,

    /// Comma-separated method names, e.g.
    /// frechetCorrelation,medianPseudo,minPseudo.
    #[arg(long, value_delimiter = ',', required = true)]
    pub methods: Vec<String>,

    /// Output TSV path.
    #[arg(long)]
    pub out: PathBuf,

    /// Samples to drop from the start of every chain.
    #[arg(long, default_value_t = 0)]
    pub burnin: usize,

    /// Keep every k-th sample after burn-in.
    #[arg(long, default_value_t = 1)]
    pub thin: usize,

    /// Seed for the randomized (jump-distance) methods.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Header name of the log-density column.
    #[arg(long, default_value = "lnP")]
    pub log_column: String,

    /// Dump each chain's full RF distance matrix to `<prefix><i>.tsv`.
    #[arg(long)]
    pub dump_matrix: Option<PathBuf>,

    /// Write the pooled split summary (split_id, probability, count).
    #[arg(long)]
    pub split_summary: Option<PathBuf>,

    /// Write the pooled topology summary (newick, probability, count).
    #[arg(long)]
    pub tree_summary: Option<PathBuf>,

    /// Jump-distance threshold tail probability.
    #[arg(long, default_value_t = 0.05)]
    pub jump_alpha: f64,

    /// Jump-distance bootstrap replicates.
    #[arg(long, default_value_t = 200)]
    pub jump_boot: usize,
}

#[derive(Args)]
pub struct CompareArgs {
    /// Tree files to compare pairwise (at least two).
    #[arg(long, num_args = 2.., required = true)]
    pub trees: Vec<PathBuf>,

    /// Log trace TSVs aligned with the tree files (for logPosterior).
    #[arg(long, num_args = 1..)]
    pub log_files: Vec<PathBuf>,

    /// Tree ESS method used for the interval widths.
    #[arg(long)]
    pub method: String,

    /// Confidence level for all intervals.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,

    /// Output TSV with one row per (pair, split).
    #[arg(long)]
    pub out: PathBuf,

    /// Per-pair summary TSV (default: `<out>.pairs.<ext>`).
    #[arg(long)]
    pub pairs_out: Option<PathBuf>,

    #[arg(long, default_value_t = 0)]
    pub burnin: usize,

    #[arg(long, default_value_t = 1)]
    pub thin: usize,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, default_value = "lnP")]
    pub log_column: String,

    /// Split-frequency filter for the pairwise ASDSF/MSDSF summary.
    #[arg(long, default_value_t = 0.1)]
    pub asdsf_min_freq: f64,

    #[arg(long, default_value_t = 0.05)]
    pub jump_alpha: f64,

    #[arg(long, default_value_t = 200)]
    pub jump_boot: usize,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Target distribution TSV with newick and probability columns.
    #[arg(long)]
    pub target: PathBuf,

    /// Metropolis iterations per chain.
    #[arg(long)]
    pub iterations: u64,

    /// Record every k-th state.
    #[arg(long, default_value_t = 1)]
    pub thin: u64,

    /// Number of independent chains (seeds derived by chain index).
    #[arg(long, default_value_t = 1)]
    pub chains: usize,

    /// Master seed.
    #[arg(long)]
    pub seed: u64,

    /// Directory for chain_XX.trees / chain_XX.log / stats.tsv.
    #[arg(long)]
    pub out_dir: PathBuf,

    /// Keep only the highest-probability topologies reaching this mass.
    #[arg(long, default_value_t = 1.0)]
    pub hpd_mass: f64,

    /// Cap on the retained support size.
    #[arg(long, default_value_t = 4096)]
    pub max_support: usize,
}

#[derive(Args)]
pub struct BenchmarkArgs {
    /// Target distribution TSV (omit with --normal-calibration).
    #[arg(long)]
    pub target: Option<PathBuf>,

    /// Run the scalar Normal(0,1) calibration testbed instead.
    #[arg(long)]
    pub normal_calibration: bool,

    /// Replicate chains.
    #[arg(long, default_value_t = 50)]
    pub m: usize,

    /// Metropolis iterations per chain.
    #[arg(long)]
    pub iterations: Option<u64>,

    /// Record every k-th state.
    #[arg(long, default_value_t = 1)]
    pub thin: u64,

    /// Comma-separated tree ESS methods to score.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,

    /// Master seed.
    #[arg(long)]
    pub seed: u64,

    /// Output TSV path.
    #[arg(long)]
    pub out: PathBuf,

    /// Pooled-probability filter for tracked splits.
    #[arg(long, default_value_t = 0.01)]
    pub split_prob_min: f64,

    /// Cap on tracked tree items (highest pooled probability first).
    #[arg(long, default_value_t = 1000)]
    pub max_tree_items: usize,

    #[arg(long, default_value_t = 1.0)]
    pub hpd_mass: f64,

    #[arg(long, default_value_t = 4096)]
    pub max_support: usize,

    #[arg(long, default_value_t = 0.05)]
    pub jump_alpha: f64,

    #[arg(long, default_value_t = 200)]
    pub jump_boot: usize,

    /// Calibration: number of chain lengths.
    #[arg(long, default_value_t = 50)]
    pub n_lengths: usize,

    /// Calibration: shortest chain.
    #[arg(long, default_value_t = 1_000)]
    pub min_length: u64,

    /// Calibration: longest chain.
    #[arg(long, default_value_t = 100_000)]
    pub max_length: u64,

    /// Calibration: kept samples per chain.
    #[arg(long, default_value_t = 1_000)]
    pub kept: usize,

    /// Calibration: random-walk proposal standard deviation.
    #[arg(long, default_value_t = 0.3)]
    pub proposal_sd: f64,
}

#[derive(Args)]
pub struct BootstrapArgs {
    /// Tree file for the single chain.
    #[arg(long)]
    pub trees: PathBuf,

    /// Summary to trace: asdsf, tree_prob_euclidean, or consensus_rf.
    #[arg(long)]
    pub kind: String,

    /// Master seed.
    #[arg(long)]
    pub seed: u64,

    /// Output TSV path.
    #[arg(long)]
    pub out: PathBuf,

    /// Comma-separated increasing prefix sizes (default: 10 log-spaced).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,

    /// Bootstrap replicates per prefix size.
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,

    /// Consensus thresholds for the consensus_rf kind.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.75, 0.95])]
    pub thresholds: Vec<f64>,

    #[arg(long, default_value_t = 0)]
    pub burnin: usize,

    #[arg(long, default_value_t = 1)]
    pub thin: usize,
}
