use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::render::Format;

#[derive(Debug, Parser)]
#[command(
    name = "benchcmp",
    version,
    about = "Compare many algorithms over many datasets"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Significant digits for printed numbers.
    #[arg(long, default_value_t = 6, global = true)]
    pub digits: usize,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean-rank summary (mean rank and number of first places).
    Rank(RankArgs),
    /// Friedman test followed by Nemenyi pairwise p-values.
    Nhst(NhstArgs),
    /// Empirical irrelevance threshold for error-rate differences.
    Threshold(InputArg),
    /// Hierarchical Bayesian ANOVA with ROPE probabilities.
    Bayes(BayesArgs),
    /// Posterior predictive check of saved normal-model draws.
    Ppc(PpcArgs),
    /// Rank analysis of run times, one subject per training half.
    Timing(TimingArgs),
    /// Generate a synthetic error table from a spec file.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Dense,
    Average,
}

#[derive(Debug, Args)]
pub struct InputArg {
    /// Error table CSV (dataset,algorithm,subset,test_error[,cv_error]).
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SchemeArg::Dense)]
    pub scheme: SchemeArg,
    /// Write the algorithm × rank histogram as CSV.
    #[arg(long)]
    pub histogram_csv: Option<PathBuf>,
    /// Write the algorithm × rank histogram as SVG.
    #[arg(long)]
    pub histogram_svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NhstArgs {
    pub input: PathBuf,
    /// Ranking used by the tests.
    #[arg(long, value_enum, default_value_t = SchemeArg::Average)]
    pub ranks: SchemeArg,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Normal,
    Robust,
}

#[derive(Debug, Args)]
pub struct McmcArgs {
    /// key=value file with chains, adaptation, burn_in, kept, thinning or
    /// preset (desk|paper). Flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Start from the long configuration (25000 kept draws per chain).
    #[arg(long)]
    pub paper_config: bool,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub adaptation: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub kept: Option<usize>,
    #[arg(long)]
    pub thinning: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BayesArgs {
    /// Error table CSV. Needed unless --load and --rope are both given.
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = VariantArg::Normal)]
    pub variant: VariantArg,
    /// ROPE half-width (default: the irrelevance threshold of the input).
    #[arg(long, alias = "rope-half-width")]
    pub rope: Option<f64>,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    /// Seed for all randomness (default: drawn from entropy and reported).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Save the posterior draws to this file.
    #[arg(long)]
    pub save: Option<PathBuf>,
    /// Reuse saved posterior draws instead of sampling.
    #[arg(long, conflicts_with = "save")]
    pub load: Option<PathBuf>,
    /// Use the (d+3)/(d+1)-corrected PSRF.
    #[arg(long)]
    pub psrf_corrected: bool,
    /// Split chains in half for the PSRF.
    #[arg(long)]
    pub psrf_split: bool,
}

#[derive(Debug, Args)]
pub struct PpcArgs {
    /// Draws file written by `bayes --save`.
    #[arg(long)]
    pub draws: PathBuf,
    /// The error table the draws were fitted to.
    pub input: PathBuf,
    /// Posterior draws to compare (capped at the number kept).
    #[arg(long, default_value_t = 1667)]
    pub n_draws: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the discrepancy pairs as CSV `t_real,t_rep`.
    #[arg(long)]
    pub scatter: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    OneTrainTest,
    PerHyper,
}

#[derive(Debug, Args)]
pub struct TimingArgs {
    /// Timing CSV (dataset,algorithm,subset,train_test_seconds,hyper_search_seconds,n_hyper_combos).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::OneTrainTest)]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::Average)]
    pub ranks: SchemeArg,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Spec file (key = value).
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}
