use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "planegen",
    version,
    about = "Synthetic plane-geometry data engine and contrastive harness"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Worker threads for generation and inference (default: logical cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// key=value file supplying defaults for the subcommand's flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Replays a run from its run.json.
    #[arg(long, value_name = "RUN_JSON", conflicts_with = "config")]
    pub from_run: Option<PathBuf>,
    /// With --from-run: write to this directory instead of the recorded one.
    #[arg(long, requires = "from_run")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Diagram-caption pairs: pairs.jsonl plus images.
    #[command(args_override_self = true)]
    GenPairs(GenPairsArgs),
    /// Same-diagram pairs rendered in a target style and the synthetic style.
    #[command(args_override_self = true)]
    GenStylePairs(GenStylePairsArgs),
    /// Premise-recognition benchmark splits.
    #[command(args_override_self = true)]
    GenBenchmark(GenBenchmarkArgs),
    /// Writes a randomly initialized checkpoint.
    #[command(args_override_self = true)]
    InitModel(InitModelArgs),
    /// Contrastive training (clip) or domain-adaptation fine-tuning (clip-da).
    #[command(args_override_self = true)]
    Train(TrainArgs),
    /// Linear probing on benchmark tasks or retrieval metrics.
    #[command(args_override_self = true)]
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Pgm,
    Png,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Dataset seed; falls back to $PLANEGEN_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImageArgs {
    #[arg(long, value_enum, default_value = "pgm")]
    pub format: Format,
    /// Also write the SVG next to each raster.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct GenPairsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 2_000)]
    pub count: usize,
    #[command(flatten)]
    pub image: ImageArgs,
    /// Pairs generated per parallel batch before writing.
    #[arg(long, default_value_t = 256)]
    pub chunk: usize,
}

#[derive(Debug, Args)]
pub struct GenStylePairsArgs {
    #[command(flatten)]
    pub common: Common,
    /// target_a, target_b, or all (alternating by index).
    #[arg(long, default_value = "all")]
    pub domain: String,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[command(flatten)]
    pub image: ImageArgs,
}

#[derive(Debug, Args)]
pub struct GenBenchmarkArgs {
    #[command(flatten)]
    pub common: Common,
    /// Task name or `all`.
    #[arg(long, default_value = "all")]
    pub task: String,
    /// train,val,test sizes.
    #[arg(long, conflicts_with = "paper_scale")]
    pub counts: Option<String>,
    /// 50,000 / 10,000 / 10,000.
    #[arg(long)]
    pub paper_scale: bool,
    /// Write manifests without rendering images.
    #[arg(long)]
    pub manifest_only: bool,
    #[command(flatten)]
    pub image: ImageArgs,
    #[arg(long, default_value_t = 1024)]
    pub chunk: usize,
}

#[derive(Debug, Args)]
pub struct InitModelArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.07)]
    pub temperature: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMode {
    Clip,
    ClipDa,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(value_enum)]
    pub mode: TrainMode,
    #[command(flatten)]
    pub common: Common,
    /// Directory holding pairs.jsonl.
    #[arg(long)]
    pub pairs: PathBuf,
    /// Directory holding style_pairs.jsonl (clip-da).
    #[arg(long)]
    pub style_pairs: Option<PathBuf>,
    /// Checkpoint to start from; a fresh model otherwise.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Target pairs per domain (clip-da).
    #[arg(long, default_value_t = 50)]
    pub da_shots: usize,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, default_value_t = 32)]
    pub da_batch_size: usize,
    /// Defaults to the initial checkpoint's value, else 0.07.
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Average the image-to-text and text-to-image directions.
    #[arg(long)]
    pub symmetric: bool,
    #[arg(long, default_value_t = 0.0)]
    pub weight_decay: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Probe,
    Retrieval,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(value_enum)]
    pub mode: EvalMode,
    /// Checkpoint file, or a training output directory.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Benchmark root (probe).
    #[arg(long)]
    pub bench: Option<PathBuf>,
    /// Task name or `all` (probe).
    #[arg(long, default_value = "all")]
    pub task: String,
    /// Directory with pairs.jsonl: image-to-caption retrieval.
    #[arg(long, conflicts_with = "style_pairs")]
    pub pairs: Option<PathBuf>,
    /// Directory with style_pairs.jsonl: target-to-synthetic retrieval.
    #[arg(long)]
    pub style_pairs: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub probe_epochs: usize,
    #[arg(long, default_value_t = 128)]
    pub probe_batch_size: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub probe_lr: f64,
    /// Seed for probe minibatch order.
    #[arg(long)]
    pub seed: Option<u64>,
}
