mod estimate;
mod eval;
mod files;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use bitevol_core::ShapeModel;
use clap::{Args, Parser, Subcommand};

/// Exit status for a failed run.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub const INPUT: u8 = 2;
    pub const NO_KEYFRAMES: u8 = 3;

    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: Self::INPUT,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self::input(error)
    }
}

#[derive(Parser, Debug)]
#[command(name = "bitevol", version, about = "Per-bite food volume from utensil mask streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate per-video food volume from interchange JSON files.
    Estimate(EstimateArgs),
    /// Score estimate results against ground-truth volumes.
    Eval(EvalArgs),
    /// Render synthetic videos with exact ground truth.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Interchange JSON files, or directories containing them.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Pipeline config JSON (a previous run's manifest also works).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_shape)]
    pub shape: Option<ShapeModel>,
    /// Face-distance threshold as a fraction of image height.
    #[arg(long = "keyframe-threshold")]
    pub keyframe_threshold: Option<f64>,
    /// Keep frames whose index is a multiple of this.
    #[arg(long)]
    pub stride: Option<u32>,
    /// Average raw volumes without the spurious-segmentation filter.
    #[arg(long = "no-filter")]
    pub no_filter: bool,
    /// Output directory for results.json and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// results.json written by `estimate`.
    #[arg(long)]
    pub results: PathBuf,
    /// JSON object mapping video id to true volume in cm3.
    #[arg(long)]
    pub truth: PathBuf,
    /// Also write eval_report.json and eval_report.txt here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["spec", "reference_suite"]))]
pub struct SynthArgs {
    /// Scene spec JSON.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Render the built-in ten-video reference suite.
    #[arg(long = "reference-suite")]
    pub reference_suite: bool,
    /// Override the scene seed (suite videos get seed, seed + 1, ...).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_shape(s: &str) -> Result<ShapeModel, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => estimate::run(&args),
        Command::Eval(args) => eval::run(&args),
        Command::Synth(args) => synth::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
