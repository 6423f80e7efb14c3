//! `hcpart`: build, query and evaluate hierarchical partitioning trees.

mod commands;
mod input;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hcpart::spectral::power::DEFAULT_EPSILON;
use hcpart::{BuildConfig, Rule};

use input::InputArgs;

#[derive(Parser, Debug)]
#[command(name = "hcpart", version, about = "Top-down hierarchical partitioning experiments")]
struct Cli {
    /// Worker threads for tree building and scoring (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset and its labels.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Build a tree and write it to --out.
    Build(BuildArgs),
    /// kNN-classify a held-out split (or --queries) through the tree.
    Classify(ClassifyArgs),
    /// Hierarchy cost of a built or freshly built tree.
    Cost(CostArgs),
    /// Leaf purity and query time against a flat k-means baseline.
    Purity(PurityArgs),
    /// Hold out classes and sweep the anomaly threshold.
    Anomaly(AnomalyArgs),
    /// Check the Cheeger inequalities on a graph.
    Cheeger(CheegerArgs),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    /// Two-block planted partition graph.
    Planted(PlantedArgs),
    /// Unit-normalized Gaussian mixture.
    Gmm(GmmArgs),
    /// Complete graph with unit weights.
    Clique(CliqueArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct PlantedArgs {
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Within-block edge probability.
    #[arg(long, default_value_t = 0.9)]
    pub p: f64,
    /// Cross-block edge probability.
    #[arg(long, default_value_t = 0.1)]
    pub q: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge list path; labels go next to it with a `.labels` extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct GmmArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub dim: usize,
    /// Minimum distance between cluster means.
    #[arg(long, default_value_t = 12.0)]
    pub sep: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV path; labels go next to it with a `.labels` extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct CliqueArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TreeArgs {
    #[arg(long, default_value = "aev")]
    pub rule: Rule,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Power-iteration accuracy for the aev rule.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1)]
    pub leaf_max: usize,
    /// Allow splits outside the (1/3, 2/3) size band.
    #[arg(long)]
    pub no_balance: bool,
}

impl TreeArgs {
    pub fn config(&self, bucket: usize) -> BuildConfig {
        let mut cfg = BuildConfig::new(self.rule, self.seed);
        cfg.balance_enforced = !self.no_balance;
        cfg.leaf_max = self.leaf_max;
        cfg.power.epsilon = self.epsilon;
        cfg.knn_bucket = bucket;
        cfg
    }
}

#[derive(Args, Debug, Serialize)]
pub struct BuildArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub tree: TreeArgs,
    /// Default query bucket stored with the tree.
    #[arg(long, default_value_t = 64)]
    pub bucket: usize,
    /// Tree file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub tree: TreeArgs,
    /// Neighbors per vote.
    #[arg(long, default_value_t = 5)]
    pub knn: usize,
    /// Descent stops at the first node holding fewer points than this.
    #[arg(long, default_value_t = 64)]
    pub bucket: usize,
    /// Share of the input held out for testing when --queries is absent.
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    /// Query CSV; the whole input is then used for training.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Labels for --queries (otherwise read from --label-column).
    #[arg(long, requires = "queries")]
    pub query_labels: Option<PathBuf>,
    /// Report file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CostArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub build: TreeArgs,
    /// Evaluate this tree instead of building one.
    #[arg(long)]
    pub tree: Option<PathBuf>,
    /// Also evaluate the cost pair by pair and compare.
    #[arg(long)]
    pub brute_force: bool,
    /// Report file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PurityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub tree: TreeArgs,
    /// Report file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct AnomalyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub tree: TreeArgs,
    /// Classes removed from training, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub holdout: Vec<usize>,
    /// Superclass map as `class:super` pairs, comma separated.
    #[arg(long)]
    pub superclass: Option<String>,
    /// Thresholds τ, comma separated; `inf` allowed. Defaults to 0, 0.1, …, 1, inf.
    #[arg(long)]
    pub threshold_grid: Option<String>,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 5)]
    pub knn: usize,
    #[arg(long, default_value_t = 64)]
    pub bucket: usize,
    /// Sweep CSV to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CheegerArgs {
    /// Edge list (`.edges`).
    #[arg(long)]
    pub input: PathBuf,
    /// Report file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match &cli.command {
        Command::Gen { kind } => commands::gen(kind),
        Command::Build(a) => commands::build(a),
        Command::Classify(a) => commands::classify(a),
        Command::Cost(a) => commands::cost(a),
        Command::Purity(a) => commands::purity(a),
        Command::Anomaly(a) => commands::anomaly(a),
        Command::Cheeger(a) => commands::cheeger(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
