//! `ggm`: estimation, model selection, simulation studies and network
//! analysis for elastic-net Gaussian graphical models.

mod cmd;
mod io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ggm_core::estimator::Estimator;
use ggm_core::netgen::TopologyKind;
use ggm_core::prewhiten::ResidualKind;
use ggm_core::select::{Criterion, GridSpec, Scoring};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "ggm", version, about = "Elastic-net Gaussian graphical models", propagate_version = true)]
struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true, env = "GGM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a ground-truth network (adjacency, precision, covariance).
    Generate(GenerateArgs),
    /// Fit one estimator at a fixed (alpha, lambda).
    Estimate(EstimateArgs),
    /// Choose (alpha, lambda) on a grid by BIC or cross-validation.
    Select(SelectArgs),
    /// Run the replicated simulation study and aggregate the metrics.
    Simulate(SimulateArgs),
    /// Prewhiten returns, fit a network, and report measures, shocks and rolling strength.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CriterionArg {
    Bic,
    Cv,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Bic => Criterion::Bic,
            CriterionArg::Cv => Criterion::Cv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ResidualArg {
    Standardized,
    Raw,
}

impl From<ResidualArg> for ResidualKind {
    fn from(r: ResidualArg) -> Self {
        match r {
            ResidualArg::Standardized => ResidualKind::Standardized,
            ResidualArg::Raw => ResidualKind::Raw,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
struct GridArgs {
    /// Number of evenly spaced alpha values in [0, 1].
    #[arg(long, default_value_t = 41)]
    grid_alphas: usize,
    /// Number of evenly spaced lambda values in [0, lambda-max].
    #[arg(long, default_value_t = 101)]
    grid_lambdas: usize,
    #[arg(long, default_value_t = 0.4)]
    lambda_max: f64,
}

impl GridArgs {
    fn grid(&self) -> ggm_core::Result<GridSpec> {
        GridSpec::uniform(self.grid_alphas, self.grid_lambdas, self.lambda_max)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
struct ScoringArgs {
    #[arg(long, value_enum, default_value_t = CriterionArg::Bic)]
    criterion: CriterionArg,
    /// Cross-validation folds.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Fold-shuffle seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl ScoringArgs {
    fn scoring(&self) -> Scoring {
        match self.criterion {
            CriterionArg::Bic => Scoring::Bic,
            CriterionArg::Cv => Scoring::Cv { folds: self.folds, seed: self.seed },
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
struct GenerateArgs {
    /// Topology: scale-free, random, hub, cluster, band, small-world, core-periphery.
    #[arg(long)]
    kind: TopologyKind,
    #[arg(long, default_value_t = 30)]
    p: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Edge probability (random) or within-cluster probability (cluster).
    #[arg(long)]
    prob: Option<f64>,
    /// Number of hubs or clusters.
    #[arg(long)]
    groups: Option<usize>,
    #[arg(long)]
    bandwidth: Option<usize>,
    /// Ring neighbours on each side (small-world).
    #[arg(long)]
    ring_degree: Option<usize>,
    /// Rewiring probability (small-world).
    #[arg(long)]
    rewire: Option<f64>,
    /// Core size (core-periphery).
    #[arg(long)]
    core: Option<usize>,
    /// Off-diagonal magnitude of the precision matrix.
    #[arg(long, default_value_t = 0.3)]
    v: f64,
    /// Extra diagonal shift of the precision matrix.
    #[arg(long, default_value_t = 0.1)]
    u: f64,
    /// Also draw this many Gaussian samples into data.csv.
    #[arg(long)]
    n: Option<usize>,
    /// Seed for the samples (default: the graph seed).
    #[arg(long)]
    sample_seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
struct EstimateArgs {
    /// Dataset CSV (header row optional, leading date column optional).
    #[arg(long)]
    data: PathBuf,
    /// Scale every column to zero mean and unit variance before fitting.
    #[arg(long)]
    standardize: bool,
    /// gelnet, glasso, cr-l2, cr-minel, 2s-and, 2s-or.
    #[arg(long)]
    estimator: Estimator,
    /// Mixing weight; fixed at 1 for glasso.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
struct SelectArgs {
    /// Dataset CSV (header row optional, leading date column optional).
    #[arg(long)]
    data: PathBuf,
    /// Scale every column to zero mean and unit variance before fitting.
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    estimator: Estimator,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
struct SimulateArgs {
    /// Comma-separated topologies (default: all seven).
    #[arg(long, value_delimiter = ',')]
    topologies: Vec<TopologyKind>,
    #[arg(long, default_value_t = 30)]
    replicates: usize,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 30)]
    p: usize,
    /// Comma-separated estimators (default: all six).
    #[arg(long, value_delimiter = ',')]
    estimators: Vec<Estimator>,
    /// Comma-separated criteria (default: bic,cv).
    #[arg(long, value_delimiter = ',', value_enum)]
    criteria: Vec<CriterionArg>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Master seed; every replicate's seeds derive from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.3)]
    v: f64,
    #[arg(long, default_value_t = 0.1)]
    u: f64,
    /// Skip the ROC paths (computed on the first replicate).
    #[arg(long)]
    no_roc: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
struct AnalyzeArgs {
    /// Returns CSV: header of series names, optional leading date column.
    #[arg(long)]
    returns: PathBuf,
    /// Use the returns directly instead of AR(1)-GARCH(1,1) residuals.
    #[arg(long)]
    no_prewhiten: bool,
    #[arg(long, value_enum, default_value_t = ResidualArg::Standardized)]
    residuals: ResidualArg,
    /// Scale every network input column to zero mean and unit variance.
    #[arg(long)]
    standardize: bool,
    #[arg(long, default_value = "2s-and")]
    estimator: Estimator,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Column receiving the unit shock.
    #[arg(long, default_value = "financials")]
    shock_column: String,
    /// Explicit shock vector (comma-separated, one entry per column); overrides --shock-column.
    #[arg(long, value_delimiter = ',')]
    shock: Vec<f64>,
    /// Rolling window length in observations (252 trading days = 12 months).
    #[arg(long, default_value_t = 252)]
    window: usize,
    /// Rolling window shift in observations (21 trading days = 1 month).
    #[arg(long, default_value_t = 21)]
    shift: usize,
    #[arg(long)]
    no_rolling: bool,
    /// Strength from signed rather than absolute partial correlations.
    #[arg(long)]
    signed_strength: bool,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match &cli.command {
        Command::Generate(a) => cmd::generate::run(a),
        Command::Estimate(a) => cmd::estimate::run(a),
        Command::Select(a) => cmd::estimate::run_select(a),
        Command::Simulate(a) => cmd::simulate::run(a),
        Command::Analyze(a) => cmd::analyze::run(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<cmd::UsageError>().is_some()
                || matches!(e.downcast_ref::<ggm_core::GgmError>(), Some(ggm_core::GgmError::InvalidParameter(_)));
            if usage {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
