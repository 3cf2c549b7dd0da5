//! The pipeline stages. Each reads its inputs from files, writes its outputs
//! to files, and returns a key=value report for stdout. Warnings and progress
//! go to stderr.

use std::collections::HashMap;
use std::fmt;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};
use squareval::board::{Color, PieceKind, PieceState, Position, Square};
use squareval::dataset::{
    counts_by_kind, examples_from_evals, load_dataset, load_evals, save_dataset, save_evals, split, EvalRecord,
};
use squareval::engine::{evaluate_batch_with_progress, EngineSession, ScoreKind, SessionConfig};
use squareval::model::{read_model, train_with_progress, write_model, ModelFile};
use squareval::pgn::{PgnError, PgnReader};
use squareval::valuation::{
    best_per_file, cp_to_winprob, empirical_heatmap, model_heatmap, render_heatmap, render_histogram, square_histogram,
    top_squares, winprob_grid, winprob_to_cp,
};

use crate::config::RunConfig;
use crate::Failure;

/// Ordered key=value lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report(Vec<(String, String)>);

impl Report {
    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.0.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.0
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.0 {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn warn(message: impl fmt::Display) {
    eprintln!("warning: {message}");
}

/// Refuses to write `output` over `input`.
fn ensure_distinct(input: &Path, output: &Path) -> Result<(), Failure> {
    let same = match (fs::canonicalize(input), fs::canonicalize(output)) {
        (Ok(a), Ok(b)) => a == b,
        _ => input == output,
    };
    if same {
        return Err(Failure::Usage(format!("output {} would overwrite input", output.display())));
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::io(format!("writing {}", path.display()), e))
}

/// Placement, side, castling and en passant: the part of a FEN an engine's
/// evaluation depends on.
fn position_key(fen: &str) -> String {
    fen.split_whitespace().take(4).collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Copy)]
struct CachedEval {
    pawns_white: f64,
    kind: ScoreKind,
    depth: u32,
}

/// Replays every game in `pgn`, evaluates each distinct position once (reusing
/// any rows found in `caches`), and writes one evals row per (game, ply).
pub fn cmd_label(pgn: &Path, out: &Path, caches: &[PathBuf], cfg: &RunConfig) -> Result<Report, Failure> {
    let started = Instant::now();
    ensure_distinct(pgn, out)?;
    let file = File::open(pgn).map_err(|e| Failure::io(format!("opening {}", pgn.display()), e))?;
    let mut games = Vec::new();
    let mut skipped = 0usize;
    for (index, item) in PgnReader::new(BufReader::new(file)).enumerate() {
        let game_id = index as u64 + 1;
        match item {
            Ok(game) => match game.replay() {
                Ok(positions) => games.push((game_id, positions)),
                Err(e) => {
                    skipped += 1;
                    warn(format_args!("skipping game {game_id}: {e}"));
                }
            },
            Err(PgnError::Game { reason, .. }) => {
                skipped += 1;
                warn(format_args!("skipping game {game_id}: {reason}"));
            }
            Err(PgnError::Stream(e)) => return Err(Failure::io(format!("reading {}", pgn.display()), e)),
        }
    }

    let mut known: HashMap<String, CachedEval> = HashMap::new();
    for path in caches {
        for r in load_evals(path)? {
            known.insert(position_key(&r.fen), CachedEval { pawns_white: r.pawns_white, kind: r.kind, depth: r.depth });
        }
    }
    let mut queued: HashMap<String, ()> = HashMap::new();
    let mut pending: Vec<Position> = Vec::new();
    let mut rows = 0usize;
    let mut cached = 0usize;
    for (_, positions) in &games {
        for (_, pos) in positions {
            rows += 1;
            let key = position_key(&pos.to_fen());
            if known.contains_key(&key) {
                cached += 1;
            } else if queued.insert(key, ()).is_none() {
                pending.push(pos.clone());
            }
        }
    }

    let mut retired = 0usize;
    if !pending.is_empty() {
        let command = cfg.engine_command.as_deref().ok_or_else(|| {
            Failure::Usage(format!(
                "no engine configured: pass --engine, set engine= in the config file, or set {}",
                crate::config::ENGINE_ENV
            ))
        })?;
        let mut pool = Vec::with_capacity(cfg.sessions);
        for _ in 0..cfg.sessions {
            pool.push(EngineSession::start(command, &cfg.engine_options, SessionConfig::default())?);
        }
        let total = pending.len();
        let step = (total / 20).max(1);
        eprintln!("label: evaluating {total} positions with {} session(s)", cfg.sessions);
        let progress = |done: usize| {
            if done.is_multiple_of(step) || done == total {
                eprintln!("label: {done}/{total} positions");
            }
        };
        let results = evaluate_batch_with_progress(&mut pool, &pending, cfg.limits, &progress)?;
        retired = cfg.sessions - pool.len();
        if retired > 0 {
            warn(format_args!("{retired} engine session(s) failed and were retired"));
        }
        for (pos, eval) in results {
            let entry = CachedEval { pawns_white: eval.pawns_white, kind: eval.kind, depth: eval.depth_reached };
            known.insert(position_key(&pos.to_fen()), entry);
        }
    }

    let mut records = Vec::with_capacity(rows);
    for (game_id, positions) in &games {
        for (ply, pos) in positions {
            let fen = pos.to_fen();
            let e = known[&position_key(&fen)];
            records.push(EvalRecord {
                game_id: *game_id,
                ply: *ply as u32,
                fen,
                pawns_white: e.pawns_white,
                kind: e.kind,
                depth: e.depth,
            });
        }
    }
    save_evals(out, &records)?;

    let mut report = Report::default();
    report.push("games_parsed", games.len());
    report.push("games_skipped", skipped);
    report.push("positions", records.len());
    report.push("evaluated", pending.len());
    report.push("cached", cached);
    report.push("sessions_retired", retired);
    report.push("elapsed_s", format_args!("{:.3}", started.elapsed().as_secs_f64()));
    report.push("out", out.display());
    Ok(report)
}

/// Expands evals rows into per-state examples.
pub fn cmd_build(evals: &Path, out: &Path, cfg: &RunConfig) -> Result<Report, Failure> {
    ensure_distinct(evals, out)?;
    let records = load_evals(evals)?;
    if records.is_empty() {
        warn(format_args!("{} has no rows; writing an empty dataset", evals.display()));
    }
    let examples = examples_from_evals(&records, &cfg.filter);
    save_dataset(out, &examples)?;
    let counts = counts_by_kind(&examples);
    let mut report = Report::default();
    report.push("evals_rows", records.len());
    report.push("filter", cfg.filter);
    report.push("examples", examples.len());
    for color in Color::ALL {
        for piece in PieceKind::ALL.into_iter().filter(|&p| cfg.filter.includes(p)) {
            report.push(format!("examples.{color}.{piece}"), counts.get(&(color, piece)).copied().unwrap_or(0));
        }
    }
    report.push("out", out.display());
    Ok(report)
}

pub fn default_history_path(model_out: &Path) -> PathBuf {
    let mut name = model_out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".history.csv");
    model_out.with_file_name(name)
}

/// Splits by game, trains, and writes the model file and a per-epoch history CSV.
pub fn cmd_train(
    dataset: &Path,
    model_out: &Path,
    history_out: Option<&Path>,
    cfg: &RunConfig,
) -> Result<Report, Failure> {
    ensure_distinct(dataset, model_out)?;
    let history_path = history_out.map_or_else(|| default_history_path(model_out), Path::to_path_buf);
    ensure_distinct(dataset, &history_path)?;
    if history_path == model_out {
        return Err(Failure::Usage("model and history outputs must differ".into()));
    }
    let examples = load_dataset(dataset)?;
    if examples.is_empty() {
        return Err(Failure::Usage(format!("dataset {} is empty", dataset.display())));
    }
    let data = split(&examples, cfg.split_fraction, cfg.train.seed)?;
    let tc = &cfg.train;
    eprintln!(
        "train: {} train / {} validation examples, {} epochs",
        data.train.len(),
        data.validation.len(),
        tc.epochs
    );
    let step = (tc.epochs / 10).max(1);
    let mut on_epoch = |s: &squareval::model::EpochStats| {
        if s.epoch.is_multiple_of(step) || s.epoch == tc.epochs {
            match s.val_mse {
                Some(v) => eprintln!("train: epoch {} train_mse={:.6} val_mse={v:.6}", s.epoch, s.train_mse),
                None => eprintln!("train: epoch {} train_mse={:.6}", s.epoch, s.train_mse),
            }
        }
    };
    let (params, history) = train_with_progress(&data, tc, &mut on_epoch)?;

    let metadata: Vec<(String, String)> = [
        ("seed", tc.seed.to_string()),
        ("learning_rate", tc.learning_rate.to_string()),
        ("beta1", tc.beta1.to_string()),
        ("beta2", tc.beta2.to_string()),
        ("epsilon", tc.epsilon.to_string()),
        ("batch_size", tc.batch_size.to_string()),
        ("epochs", tc.epochs.to_string()),
        ("shuffle", tc.shuffle.to_string()),
        ("split_fraction", cfg.split_fraction.to_string()),
        ("train_games", data.train_games.len().to_string()),
        ("validation_games", data.validation_games.len().to_string()),
        ("train_examples", data.train.len().to_string()),
        ("validation_examples", data.validation.len().to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let mut bytes = Vec::new();
    write_model(&mut bytes, &ModelFile { params, metadata })?;
    write_file(model_out, &bytes)?;

    let mut csv = String::from("epoch,train_mse,val_mse\n");
    for s in &history {
        let val = s.val_mse.map(|v| v.to_string()).unwrap_or_default();
        csv.push_str(&format!("{},{},{val}\n", s.epoch, s.train_mse));
    }
    write_file(&history_path, csv.as_bytes())?;

    let last = history.last();
    let mut report = Report::default();
    report.push("examples", examples.len());
    report.push("train_examples", data.train.len());
    report.push("validation_examples", data.validation.len());
    report.push("epochs", history.len());
    report.push("final_train_mse", last.map_or("none".into(), |s| format!("{:.6}", s.train_mse)));
    report.push("final_val_mse", last.and_then(|s| s.val_mse).map_or("none".into(), |v| format!("{v:.6}")));
    report.push("model_sha256", sha256_hex(&bytes));
    report.push("out", model_out.display());
    report.push("history", history_path.display());
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GridInput {
    Model(PathBuf),
    Dataset(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Pawns,
    WinProbability,
}

impl std::str::FromStr for GridKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cp" | "pawns" => Ok(GridKind::Pawns),
            "winprob" | "wp" => Ok(GridKind::WinProbability),
            _ => Err(format!("unknown heatmap kind '{s}' (expected cp or winprob)")),
        }
    }
}

/// Renders one (color, piece) grid from a model or from a dataset.
pub fn cmd_heatmap(
    input: &GridInput,
    color: Color,
    piece: PieceKind,
    kind: GridKind,
    out: &Path,
    cfg: &RunConfig,
) -> Result<Report, Failure> {
    let (source, grid) = match input {
        GridInput::Model(path) => {
            ensure_distinct(path, out)?;
            let bytes = fs::read(path).map_err(|e| Failure::io(format!("reading {}", path.display()), e))?;
            let model = read_model(bytes.as_slice())?;
            let mut grid = model_heatmap(&model.params, color, piece)?;
            grid.examples = model.meta("train_examples").and_then(|v| v.parse().ok()).unwrap_or(0);
            grid.model_hash = Some(sha256_hex(&bytes));
            ("model", grid)
        }
        GridInput::Dataset(path) => {
            ensure_distinct(path, out)?;
            let examples = load_dataset(path)?;
            let grid = empirical_heatmap(&examples, color, piece);
            if grid.examples == 0 {
                warn(format_args!("no {color} {piece} examples in {}", path.display()));
            }
            ("dataset", grid)
        }
    };
    let grid = match kind {
        GridKind::Pawns => grid,
        GridKind::WinProbability => winprob_grid(&grid),
    };
    let rendered = render_heatmap(&grid, cfg.format);
    write_file(out, rendered.as_bytes())?;

    let cell = |(sq, v): (Square, f64)| format!("{sq}:{v:.3}");
    let mut report = Report::default();
    report.push("source", source);
    report.push("color", color);
    report.push("piece", piece);
    report.push("kind", if kind == GridKind::Pawns { "cp" } else { "winprob" });
    report.push("format", cfg.format.extension());
    report.push("cells_present", grid.present().count());
    report.push("examples", grid.examples);
    report.push("mean_over_squares", grid.mean_over_squares().map_or("none".into(), |m| format!("{m:.4}")));
    report.push("top", top_squares(&grid, 1)?.into_iter().map(cell).next().unwrap_or_else(|| "none".into()));
    report.push("best_per_file", best_per_file(&grid).into_iter().map(cell).collect::<Vec<_>>().join(";"));
    report.push("output_sha256", sha256_hex(rendered.as_bytes()));
    report.push("out", out.display());
    Ok(report)
}

/// Renders the distribution of targets for one (color, piece, square) state.
pub fn cmd_histogram(
    dataset: &Path,
    state: PieceState,
    bin_width: f64,
    out: &Path,
    cfg: &RunConfig,
) -> Result<Report, Failure> {
    ensure_distinct(dataset, out)?;
    let examples = load_dataset(dataset)?;
    let hist = square_histogram(&examples, state, bin_width)?;
    if hist.n == 0 {
        warn(format_args!("no examples for {state} in {}", dataset.display()));
    }
    let rendered = render_histogram(&hist, cfg.format);
    write_file(out, rendered.as_bytes())?;
    let targets: Vec<f64> = examples.iter().filter(|e| e.state == state).map(|e| e.target_pawns).collect();
    let mut report = Report::default();
    report.push("color", state.color);
    report.push("piece", state.piece);
    report.push("square", state.square);
    report.push("n", hist.n);
    report.push("bins", hist.counts.len());
    report.push("bin_width", bin_width);
    let mean = (!targets.is_empty()).then(|| targets.iter().sum::<f64>() / targets.len() as f64);
    report.push("mean", mean.map_or("none".into(), |m| format!("{m:.4}")));
    report.push("format", cfg.format.extension());
    report.push("output_sha256", sha256_hex(rendered.as_bytes()));
    report.push("out", out.display());
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    PawnsToWinProb,
    WinProbToPawns,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cp2wp" => Ok(Direction::PawnsToWinProb),
            "wp2cp" => Ok(Direction::WinProbToPawns),
            _ => Err(format!("unknown direction '{s}' (expected cp2wp or wp2cp)")),
        }
    }
}

/// The commonly quoted win probability for a 0.2 pawn edge, and the
/// tolerance within which the closed form is taken to agree with it.
const QUOTED_WINPROB_AT_0_2: f64 = 0.526;
const QUOTED_TOLERANCE: f64 = 0.003;

pub fn cmd_convert(direction: Direction, value: f64) -> Result<Report, Failure> {
    if !value.is_finite() {
        return Err(Failure::Numeric(format!("value must be finite, got {value}")));
    }
    let (name, result) = match direction {
        Direction::PawnsToWinProb => ("cp2wp", cp_to_winprob(value)),
        Direction::WinProbToPawns => ("wp2cp", winprob_to_cp(value)?),
    };
    if direction == Direction::PawnsToWinProb && value == 0.2 {
        let gap = (result - QUOTED_WINPROB_AT_0_2).abs();
        eprintln!(
            "note: the closed form gives {result:.4} for 0.2 pawns; the commonly quoted {QUOTED_WINPROB_AT_0_2} differs by {gap:.4} ({} the {QUOTED_TOLERANCE} tolerance)",
            if gap <= QUOTED_TOLERANCE { "within" } else { "outside" }
        );
    }
    let mut report = Report::default();
    report.push("direction", name);
    report.push("input", value);
    report.push("value", format_args!("{result:.4}"));
    report.push("exact", result);
    Ok(report)
}
