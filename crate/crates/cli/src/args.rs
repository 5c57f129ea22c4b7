use clap::{Args, Parser, Subcommand};
use ecgnet::model::{Arch, DEFAULT_INPUT_LENGTH};
use serde::Serialize;
use std::path::PathBuf;

/// Heartbeat classification with residual 1-D CNNs.
#[derive(Debug, Parser)]
#[command(name = "ecgnet", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Stratified train/validation/test split of a beat CSV.
    Split(SplitArgs),
    /// Train a model from scratch.
    Train(TrainArgs),
    /// Fine-tune a five-class checkpoint on a new label set.
    Transfer(TransferArgs),
    /// Confusion matrix and per-class metrics on a test CSV.
    Eval(EvalArgs),
    /// Batch inference throughput.
    Bench(BenchArgs),
    /// Replay beats at a fixed arrival rate and report latency percentiles.
    Replay(ReplayArgs),
    /// Print a checkpoint's architecture summary.
    Inspect(InspectArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DataFlags {
    /// Samples per beat (each CSV row has this many values plus a label).
    #[arg(long, default_value_t = DEFAULT_INPUT_LENGTH)]
    pub length: usize,
    /// Clamp samples outside [0, 1] instead of rejecting the file.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SplitArgs {
    /// Beats CSV to split.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for train.csv, val.csv and test.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Train, validation and test fractions.
    #[arg(long, default_value = "0.6,0.2,0.2", value_parser = parse_ratios)]
    pub ratios: [f64; 3],
    #[command(flatten)]
    pub data: DataFlags,
}

#[derive(Debug, Args, Serialize)]
pub struct FitFlags {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 128)]
    pub batch_size: usize,
    #[arg(long = "lr", default_value_t = 1e-3)]
    pub learning_rate: f64,
    /// Upper bound on epochs; early stopping usually ends sooner.
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Epochs without validation-accuracy improvement before stopping.
    #[arg(long, default_value_t = 5)]
    pub patience: usize,
    /// Stagnant epochs before the learning rate is reduced.
    #[arg(long, default_value_t = 3)]
    pub plateau_patience: usize,
    #[arg(long, default_value_t = 0.1)]
    pub plateau_factor: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub min_lr: f64,
    /// Per-epoch history (JSON lines); defaults to <out>.history.jsonl.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// `original` (11 convs) or `modified` (6 convs).
    #[arg(long, default_value = "modified")]
    pub arch: Arch,
    /// Number of output classes.
    #[arg(long, default_value_t = 5)]
    pub classes: usize,
    /// Training beats CSV.
    #[arg(long)]
    pub train: PathBuf,
    /// Validation beats CSV, monitored for early stopping.
    #[arg(long)]
    pub val: PathBuf,
    /// Checkpoint to write.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub fit: FitFlags,
    #[command(flatten)]
    pub data: DataFlags,
}

#[derive(Debug, Args, Serialize)]
pub struct TransferArgs {
    /// Five-class base checkpoint.
    #[arg(long)]
    pub base: PathBuf,
    /// Number of classes in the new label set.
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub val: PathBuf,
    /// Checkpoint to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also train the convolutional layers.
    #[arg(long)]
    pub unfreeze: bool,
    #[command(flatten)]
    pub fit: FitFlags,
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Write the report as JSON here as well.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub batch: usize,
    /// Timed passes over the test set (at least 3).
    #[arg(long, default_value_t = 5)]
    pub repeat: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Beats per second.
    #[arg(long, default_value_t = 500.0)]
    pub rate: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct InspectArgs {
    pub checkpoint: PathBuf,
}

fn parse_ratios(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|p| format!("expected three comma-separated ratios, got {}", p.len()))
}
