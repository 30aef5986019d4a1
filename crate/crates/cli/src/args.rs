use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iirnet::randfilt::FamilyId;

#[derive(Debug, Parser)]
#[command(name = "iirnet", version, about = "Neural and classical IIR filter design")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for generation and evaluation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Single worker thread; outputs are bit-reproducible.
    #[arg(long, global = true)]
    pub deterministic: bool,
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    /// TOML file of `flag-name = value` pairs; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a random-filter dataset.
    Generate(GenerateArgs),
    /// Train an estimator network.
    Train(TrainArgs),
    /// Design one filter for a response CSV.
    Fit(FitArgs),
    /// Turn impulse responses into smoothed response CSVs.
    Ingest(IngestArgs),
    /// Accuracy report over a dataset.
    Eval(EvalArgs),
    /// Accuracy and single-threaded timing report.
    Bench(EvalArgs),
    /// Render CSV outputs as PNG images.
    Plot(PlotArgs),
}

fn parse_family(s: &str) -> Result<FamilyId, String> {
    s.parse().map_err(|e: iirnet::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value = "G", value_parser = parse_family)]
    pub family: FamilyId,
    #[arg(long, default_value_t = 16)]
    pub order: usize,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 512)]
    pub f_count: usize,
    #[arg(long, default_value_t = 44100.0)]
    pub sample_rate: f64,
    /// Also write every filter's zeros and poles.
    #[arg(long)]
    pub roots: bool,
    /// Regenerate from a saved manifest instead of the flags above.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value = "G", value_parser = parse_family)]
    pub family: FamilyId,
    #[arg(long, default_value_t = 16)]
    pub order: usize,
    #[arg(long, default_value_t = 1024)]
    pub hidden_dim: usize,
    #[arg(long, default_value_t = 512)]
    pub f_count: usize,
    #[arg(long, default_value_t = 44100.0)]
    pub sample_rate: f64,
    #[arg(long, default_value_t = 128)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 20_000)]
    pub filters_per_epoch: usize,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    /// Defaults to 1e-5, or 1e-6 from order 32 up.
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.8,0.95")]
    pub lr_decay_points: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub lr_decay_factor: f64,
    #[arg(long, default_value_t = 0.9)]
    pub grad_clip: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub weight_decay: f64,
    /// Continue from a checkpoint.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Also checkpoint every this many epochs (0: only at the end).
    #[arg(long, default_value_t = 0)]
    pub checkpoint_every: usize,
    #[arg(long, default_value = "model.ckpt")]
    pub checkpoint: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitMethod {
    Iirnet,
    Myw,
    Sgd,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub method: FitMethod,
    /// Design order; taken from the model for `iirnet`.
    #[arg(long)]
    pub order: Option<usize>,
    /// `freq_hz,mag_db` response CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Write `freq_hz,target_db,fit_db` for plotting.
    #[arg(long)]
    pub overlay: bool,
    #[arg(long, default_value = "fit")]
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SyntheticKind {
    Hrtf,
    Cabinet,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// WAV file of impulse responses, one per channel.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub input: Option<PathBuf>,
    /// Generate a synthetic impulse-response set instead.
    #[arg(long, value_enum)]
    pub synthetic: Option<SyntheticKind>,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long)]
    pub channel: Option<usize>,
    #[arg(long, default_value_t = 512)]
    pub f_count: usize,
    #[arg(long, default_value_t = 44100.0)]
    pub sample_rate: f64,
    #[arg(long, default_value_t = 63)]
    pub window: usize,
    #[arg(long, default_value_t = 3)]
    pub poly_order: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoints; each adds an `iirnet` row.
    #[arg(long, value_delimiter = ',')]
    pub model: Vec<PathBuf>,
    /// Comma-separated `iirnet`, `myw`, `sgd:<steps>`.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    #[arg(long, default_value = "G", value_parser = parse_family)]
    pub family: FamilyId,
    /// Target order, and design order for `myw` and `sgd`.
    #[arg(long, default_value_t = 16)]
    pub order: usize,
    #[arg(long)]
    pub design_order: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub f_count: Option<usize>,
    #[arg(long, default_value_t = 44100.0)]
    pub sample_rate: f64,
    /// Evaluate on the response CSVs in this directory instead.
    #[arg(long)]
    pub dataset_dir: Option<PathBuf>,
    /// Add single-threaded timing columns.
    #[arg(long)]
    pub timing: bool,
    #[arg(long, default_value_t = 1000)]
    pub repeats: usize,
    #[arg(long, default_value_t = 10)]
    pub warmup: usize,
    /// Cross-order table of every model over these target orders.
    #[arg(long, value_delimiter = ',')]
    pub test_orders: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Response, overlay, dataset or root CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Image name; defaults to the input stem with `.png`.
    #[arg(long)]
    pub output: Option<String>,
    #[arg(long, default_value_t = 800)]
    pub width: u32,
    #[arg(long, default_value_t = 500)]
    pub height: u32,
}
