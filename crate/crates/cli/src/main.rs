mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "lanegraph",
    version,
    about = "Lane graph inference, aggregation and evaluation on synthetic worlds"
)]
pub struct Cli {
    /// Pipeline config JSON; missing keys take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the effective config as JSON and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
    /// Floating-point type of graph and network numerics.
    #[arg(long, global = true, value_enum, default_value_t = Precision::F32)]
    pub precision: Precision,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic world directory.
    Worldgen(WorldgenArgs),
    /// Cut labelled crops out of a world into a dataset directory.
    Sample(SampleArgs),
    /// Train the scorer on a dataset directory.
    Train(TrainArgs),
    /// Predict the successor graph of one crop.
    Infer(InferArgs),
    /// Explore a world with virtual agents and aggregate their predictions.
    Drive(DriveArgs),
    /// Compare a predicted graph with the ground truth.
    Eval(EvalArgs),
    /// Plan routes on a predicted graph and score them against the GT.
    Plan(PlanArgs),
    /// Draw graphs over a raster.
    Render(RenderArgs),
}

#[derive(Args, Debug)]
pub struct WorldgenArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the world seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    pub world: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Crop at the exact GT poses instead of noisy ones.
    #[arg(long)]
    pub no_noise: bool,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Checkpoint to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-epoch mean loss as CSV.
    #[arg(long)]
    pub loss_csv: Option<PathBuf>,
    /// Start from this checkpoint instead of a fresh initialization.
    #[arg(long)]
    pub init: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InferArgs {
    /// Crop directory as written by `sample`.
    #[arg(long)]
    pub crop: PathBuf,
    /// `oracle` or a checkpoint path.
    #[arg(long, default_value = "oracle")]
    pub scorer: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the graph in world coordinates instead of crop pixels.
    #[arg(long)]
    pub world_frame: bool,
}

#[derive(Args, Debug)]
pub struct DriveArgs {
    #[arg(long)]
    pub world: PathBuf,
    #[arg(long, default_value = "oracle")]
    pub scorer: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of agents, each starting at a sampled GT pose.
    #[arg(long, default_value_t = 4)]
    pub agents: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// JSONL trace of every agent, one event per line.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Directory for the bundle: cropped GT, prediction, report, config.
    #[arg(long)]
    pub bundle: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 200.0)]
    pub max_len_m: f64,
    /// Per-task CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    /// PNG or PGM background.
    #[arg(long)]
    pub raster: PathBuf,
    /// Graph JSON in the raster's pixel coordinates; repeatable.
    #[arg(long, required = true)]
    pub graph: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", commands::describe(&e));
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
