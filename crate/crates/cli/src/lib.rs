//! The `squareval` command line: label → build → train → heatmap/histogram,
//! plus `convert` for single values.
//!
//! Exit codes: 0 success, 1 usage, 2 input format, 3 engine, 4 numeric.

pub mod commands;
pub mod config;
mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use squareval::board::{Color, PieceKind, PieceState, Square};
use squareval::dataset::StateFilter;
use squareval::valuation::{RenderFormat, DEFAULT_BIN_WIDTH};

pub use commands::Report;
use commands::{Direction, GridInput, GridKind};
use config::{Overrides, RunConfig, ENGINE_ENV};
pub use error::Failure;

#[derive(Debug, Parser)]
#[command(name = "squareval", version, about = "Value chess piece placements from engine-labeled games")]
pub struct Cli {
    /// key=value config file; flags take precedence over it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every position of every game in a PGN file.
    Label(LabelArgs),
    /// Turn an evals file into per-state training examples.
    Build(BuildArgs),
    /// Train the regression model on a dataset.
    Train(TrainArgs),
    /// Render an 8x8 grid for one color and piece.
    Heatmap(HeatmapArgs),
    /// Render the target distribution for one color, piece and square.
    Histogram(HistogramArgs),
    /// Convert between pawns and win probability.
    Convert(ConvertArgs),
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    pub pgn: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Engine command line (program and arguments).
    #[arg(long)]
    pub engine: Option<String>,
    #[arg(long, conflicts_with = "movetime")]
    pub depth: Option<u32>,
    /// Milliseconds per position.
    #[arg(long)]
    pub movetime: Option<u64>,
    #[arg(long)]
    pub sessions: Option<usize>,
    /// Existing evals files whose rows are reused instead of re-evaluated.
    #[arg(long = "cache", value_name = "EVALS")]
    pub caches: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    pub evals: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// `all`, or piece kinds such as `knights,bishops` or `N,B`.
    #[arg(long)]
    pub filter: Option<StateFilter>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// History CSV path; defaults to `<out>.history.csv`.
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of games used for training.
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[arg(long, required_unless_present = "dataset", conflicts_with = "dataset")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub color: Color,
    #[arg(long)]
    pub piece: PieceKind,
    /// `cp` (pawns) or `winprob`.
    #[arg(long, default_value = "cp")]
    pub kind: GridKind,
    /// text, csv or svg.
    #[arg(long)]
    pub format: Option<RenderFormat>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    pub dataset: PathBuf,
    #[arg(long)]
    pub color: Color,
    #[arg(long)]
    pub piece: PieceKind,
    #[arg(long)]
    pub square: Square,
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
    pub bin_width: f64,
    #[arg(long)]
    pub format: Option<RenderFormat>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// `cp2wp` (pawns to win probability) or `wp2cp`.
    pub direction: Direction,
    #[arg(allow_hyphen_values = true)]
    pub value: f64,
}

fn overrides(command: &Command) -> Overrides {
    let mut o = Overrides::default();
    match command {
        Command::Label(a) => {
            o.engine = a.engine.clone();
            o.depth = a.depth;
            o.movetime = a.movetime;
            o.sessions = a.sessions;
        }
        Command::Build(a) => o.filter = a.filter,
        Command::Train(a) => {
            o.seed = a.seed;
            o.split = a.split;
            o.epochs = a.epochs;
            o.lr = a.lr;
            o.batch = a.batch;
        }
        Command::Heatmap(a) => o.format = a.format,
        Command::Histogram(a) => o.format = a.format,
        Command::Convert(_) => {}
    }
    o
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<Report, Failure> {
    let cfg = RunConfig::resolve(cli.config.as_deref(), &overrides(&cli.command), std::env::var(ENGINE_ENV).ok())?;
    match &cli.command {
        Command::Label(a) => commands::cmd_label(&a.pgn, &a.out, &a.caches, &cfg),
        Command::Build(a) => commands::cmd_build(&a.evals, &a.out, &cfg),
        Command::Train(a) => commands::cmd_train(&a.dataset, &a.out, a.history.as_deref(), &cfg),
        Command::Heatmap(a) => {
            let input = match (&a.model, &a.dataset) {
                (Some(m), _) => GridInput::Model(m.clone()),
                (None, Some(d)) => GridInput::Dataset(d.clone()),
                (None, None) => return Err(Failure::Usage("pass --model or --dataset".into())),
            };
            commands::cmd_heatmap(&input, a.color, a.piece, a.kind, &a.out, &cfg)
        }
        Command::Histogram(a) => {
            let state = PieceState { color: a.color, piece: a.piece, square: a.square };
            commands::cmd_histogram(&a.dataset, state, a.bin_width, &a.out, &cfg)
        }
        Command::Convert(a) => commands::cmd_convert(a.direction, a.value),
    }
}

/// Parses `args`, runs the command, prints the report, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            print!("{report}");
            0
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.exit_code()
        }
    }
}
