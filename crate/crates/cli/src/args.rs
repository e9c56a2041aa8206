use std::path::PathBuf;

use clap::builder::RangedU64ValueParser;
use clap::{Args, Parser, Subcommand};
use depthstroke_core::{CurveClass, SmoothingMethod};

#[derive(Debug, Parser)]
#[command(name = "depthstroke", version, about = "Pressure-based 3D curve sketching engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled dataset.
    Gen(GenArgs),
    /// Train the curve classifier.
    Train(TrainArgs),
    /// Evaluate a model on a labeled dataset.
    Eval(EvalArgs),
    /// Classify one stroke.
    Classify(ClassifyArgs),
    /// Classify, process, project and smooth one stroke.
    Process(ProcessArgs),
    /// Inspect the processing configuration.
    Config(ConfigArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

fn positive() -> RangedU64ValueParser<usize> {
    RangedU64ValueParser::new().range(1..)
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 49, value_parser = positive())]
    pub spiral: usize,
    #[arg(long, default_value_t = 65, value_parser = positive())]
    pub forward: usize,
    #[arg(long, default_value_t = 67, value_parser = positive())]
    pub backward: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Feature settings a command expects the model to use.
#[derive(Debug, Args, Clone, Copy, Default)]
pub struct FeatureArgs {
    /// Transform length the model must have been trained with.
    #[arg(long)]
    pub fft_len: Option<usize>,
    /// Feature count the model must have been trained with.
    #[arg(long)]
    pub features: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, required_unless_present = "sweep", conflicts_with = "sweep")]
    pub out: Option<PathBuf>,
    /// Layer sizes such as 50:35:3 or 50:62:46:3.
    #[arg(long)]
    pub topology: Option<String>,
    #[arg(long, default_value_t = 30_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub target_mse: f64,
    #[arg(long, default_value_t = 0.5)]
    pub lr: f64,
    #[arg(long, default_value_t = 1.05)]
    pub lr_up: f64,
    #[arg(long, default_value_t = 0.5)]
    pub lr_down: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent runs with consecutive seeds; the lowest final MSE wins.
    #[arg(long, default_value_t = 1, value_parser = positive())]
    pub restarts: usize,
    #[arg(long, default_value_t = 512)]
    pub fft_len: usize,
    #[arg(long, default_value_t = 50)]
    pub features: usize,
    /// Hidden-size range such as 1..100; trains one network per size.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Write the training report (including the MSE trace) as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub feature: FeatureArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub stroke: PathBuf,
    #[command(flatten)]
    pub feature: FeatureArgs,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct ProjectionArgs {
    #[arg(long, default_value_t = 100.0)]
    pub depth_scale: f64,
    /// Map full pressure to the far plane.
    #[arg(long)]
    pub invert: bool,
}

#[derive(Debug, Args)]
pub struct ProcessArgs {
    #[arg(long, required_unless_present = "class")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub stroke: PathBuf,
    /// Skip classification and use this class.
    #[arg(long)]
    pub class: Option<CurveClass>,
    /// Curve file for the projected curve.
    #[arg(long)]
    pub out: PathBuf,
    /// Curve file for the smoothed curve.
    #[arg(long)]
    pub smoothed_out: Option<PathBuf>,
    #[arg(long)]
    pub smooth: Option<SmoothingMethod>,
    #[arg(long, default_value_t = depthstroke_core::smoothing::DEFAULT_SAMPLES_PER_SEGMENT, value_parser = positive())]
    pub samples_per_segment: usize,
    /// Write every processing stage as JSON.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// Pipeline configuration file; defaults are compiled in.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub projection: ProjectionArgs,
    #[command(flatten)]
    pub feature: FeatureArgs,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Print the active configuration.
    #[arg(long, required = true)]
    pub dump: bool,
    /// Configuration file to validate and print instead of the defaults.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 8080, value_parser = clap::value_parser!(u16).range(1..))]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory served at `/` (the sketch UI bundle).
    #[arg(long = "static")]
    pub static_dir: Option<PathBuf>,
    #[command(flatten)]
    pub projection: ProjectionArgs,
    #[command(flatten)]
    pub feature: FeatureArgs,
}
