use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use usimul::sampler::SamplerKind;
use usimul::CorrectionKind;

/// Binary classification from uncertain similarity triplets and unlabeled data.
///
/// Every flag may also be given in a plain-text file passed with
/// `--config FILE`: one `key=value` per line, `#` starts a comment, keys are
/// flag names without the leading dashes. Flags on the command line win.
#[derive(Debug, Parser)]
#[command(name = "usimul", version, args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a labeled pool from a two-class isotropic Gaussian source.
    Synth(SynthArgs),
    /// Build uncertain similarity triplets and unlabeled points from a labeled pool.
    MakeWeak(MakeWeakArgs),
    /// Train a scorer on triplets and unlabeled points.
    Train(TrainArgs),
    /// Accuracy of a trained model on a labeled CSV.
    Eval(EvalArgs),
    /// Run a verification suite; exits with status 5 if any check fails.
    Verify(VerifyArgs),
    /// Repeated-training sweep over the prior, data fraction or correction.
    Sweep(SweepArgs),
}

/// Gaussian source flags shared by `synth` and `sweep`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SourceArgs {
    /// Feature dimension.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Positive-class mean, comma separated. Defaults to +separation/2 on the first axis.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub mu_plus: Option<Vec<f64>>,
    /// Negative-class mean, comma separated. Defaults to -separation/2 on the first axis.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub mu_minus: Option<Vec<f64>>,
    /// Distance between the default means, in units of sigma.
    #[arg(long, default_value_t = 4.0)]
    pub separation: f64,
    /// Per-coordinate standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Positive class prior of the source.
    #[arg(long, default_value_t = 0.4)]
    pub pi: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Number of labeled examples.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV (`y,f1,...,fd`).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MakeWeakArgs {
    /// Labeled CSV pool.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Enforce this positive prior when drawing from the pool (default: the pool's own class ratio).
    #[arg(long)]
    pub pi: Option<f64>,
    /// Number of triplets.
    #[arg(long)]
    pub n_us: usize,
    /// Number of unlabeled points.
    #[arg(long)]
    pub n_u: usize,
    /// Triplet sampler: `rejection` or `paper-case`.
    #[arg(long, default_value = "rejection")]
    pub sampler: SamplerKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving `triplets.jsonl` and `unlabeled.jsonl`.
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Model and optimizer flags shared by `train` and `sweep`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainingArgs {
    /// Model kind: `linear` or `mlp`.
    #[arg(long, default_value = "linear", value_parser = ["linear", "mlp"])]
    pub model: String,
    /// Hidden width of the MLP.
    #[arg(long, default_value_t = 64)]
    pub hidden: usize,
    /// Risk correction: `none`, `max_zero` or `abs`.
    #[arg(long, default_value = "abs")]
    pub correction: CorrectionKind,
    #[arg(long, default_value_t = 1e-2)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    /// Mini-batch size.
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    /// Triplets JSONL.
    #[arg(long)]
    pub us: PathBuf,
    /// Unlabeled JSONL.
    #[arg(long)]
    pub u: PathBuf,
    /// Positive class prior given to the learner; must differ from 0.5.
    #[arg(long)]
    pub pi: f64,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Labeled CSV for per-epoch and final test accuracy.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Output model JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Training log CSV (default: `<out>.log.csv`).
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// Model JSON written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled CSV.
    #[arg(long)]
    pub test: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// thetas, identity, acceptance, bias, gradients, trend or all.
    #[arg(long, default_value = "all", value_parser = ["thetas", "identity", "acceptance", "bias", "gradients", "trend", "all"])]
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// Sweep axis: `prior`, `fraction` or `correction`.
    #[arg(long, value_parser = ["prior", "fraction", "correction"])]
    pub kind: String,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = 2000)]
    pub n_us: usize,
    #[arg(long, default_value_t = 2000)]
    pub n_u: usize,
    #[arg(long, default_value_t = 2000)]
    pub n_test: usize,
    /// Triplet sampler: `rejection` or `paper-case`.
    #[arg(long, default_value = "rejection")]
    pub sampler: SamplerKind,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Seeds, comma separated; one training run per setting and seed.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    pub seeds: Vec<u64>,
    /// Given priors for `--kind prior`.
    #[arg(long, value_delimiter = ',', default_value = "0.35,0.4,0.45")]
    pub given: Vec<f64>,
    /// Data fractions for `--kind fraction`.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5,1")]
    pub fractions: Vec<f64>,
    /// Corrections for `--kind correction`.
    #[arg(long, value_delimiter = ',', default_value = "none,max_zero,abs")]
    pub corrections: Vec<CorrectionKind>,
    /// Output stem; writes `<out>.csv`, `<out>.json` and `<out>.dat`.
    #[arg(long)]
    pub out: PathBuf,
}
