//! Supervised examples: every piece state of every labeled position, with the
//! position's evaluation as a color-relative target.
//!
//! Two line-oriented files live here. The evals file (`squareval-evals v1`)
//! holds one engine evaluation per replayed position; the dataset file
//! (`squareval-dataset v1`) holds one row per extracted state.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::thread;

use thiserror::Error;

use crate::board::{Color, PieceKind, PieceState, Position, Square};
use crate::engine::{Evaluation, ScoreKind, MATE_CAP};
use crate::pgn::{GameRecord, ReplayError};
use crate::rng::SplitMix64;

pub const INPUT_DIM: usize = 72;
pub const DATASET_HEADER: &str = "squareval-dataset v1";
pub const EVALS_HEADER: &str = "squareval-evals v1";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledExample {
    pub state: PieceState,
    /// Color-relative advantage in pawns.
    pub target_pawns: f64,
    pub game_id: u64,
    pub ply: u32,
}

impl LabeledExample {
    pub fn encode(&self) -> EncodedExample {
        EncodedExample { x: encode(&self.state), y: self.target_pawns }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodedExample {
    pub x: Vec<f64>,
    pub y: f64,
}

/// One-hot layout: [0,2) color, [2,8) piece kind, [8,72) square index.
pub fn encode(state: &PieceState) -> Vec<f64> {
    let mut x = vec![0.0; INPUT_DIM];
    x[state.color.index()] = 1.0;
    x[2 + state.piece.index()] = 1.0;
    x[8 + state.square.index()] = 1.0;
    x
}

/// Which piece kinds enter the dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StateFilter {
    pieces: [bool; 6],
}

impl StateFilter {
    pub fn all() -> Self {
        StateFilter { pieces: [true; 6] }
    }

    pub fn only(kinds: &[PieceKind]) -> Self {
        let mut pieces = [false; 6];
        for k in kinds {
            pieces[k.index()] = true;
        }
        StateFilter { pieces }
    }

    pub fn accepts(&self, state: &PieceState) -> bool {
        self.includes(state.piece)
    }

    pub fn includes(&self, kind: PieceKind) -> bool {
        self.pieces[kind.index()]
    }
}

impl Default for StateFilter {
    fn default() -> Self {
        StateFilter::all()
    }
}

impl FromStr for StateFilter {
    type Err = String;

    /// `all`, or a comma list of piece names / letters (`knights,bishops`, `N,B`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(StateFilter::all());
        }
        let mut kinds = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let singular = part.strip_suffix('s').filter(|p| p.len() > 1).unwrap_or(part);
            kinds.push(singular.parse::<PieceKind>().map_err(|_| format!("unknown filter piece '{part}'"))?);
        }
        if kinds.is_empty() {
            return Err(format!("empty state filter '{s}'"));
        }
        Ok(StateFilter::only(&kinds))
    }
}

impl fmt::Display for StateFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces == [true; 6] {
            return f.write_str("all");
        }
        let letters: Vec<String> =
            PieceKind::ALL.iter().filter(|k| self.pieces[k.index()]).map(|k| k.letter().to_string()).collect();
        f.write_str(&letters.join(","))
    }
}

/// Examples for one labeled position, in canonical state order.
pub fn examples_for_position(
    game_id: u64,
    ply: u32,
    position: &Position,
    pawns_white: f64,
    filter: &StateFilter,
) -> Vec<LabeledExample> {
    position
        .piece_states()
        .into_iter()
        .filter(|s| filter.accepts(s))
        .map(|state| LabeledExample { state, target_pawns: state.color.sign() * pawns_white, game_id, ply })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExtractReport {
    pub games_used: usize,
    pub games_skipped: usize,
    pub positions: usize,
    pub replay_errors: Vec<ReplayError>,
    /// Positions with no evaluation available; their games are skipped.
    pub missing_evals: usize,
}

/// Replays every game and emits one example per filtered state per position.
///
/// A game that fails to replay, or has a position without an evaluation, is
/// skipped as a whole and counted in the report. Output is ordered by
/// (game id, ply, state) regardless of how work was scheduled.
pub fn extract_examples<F>(
    games: &[(u64, GameRecord)],
    evals: F,
    filter: &StateFilter,
) -> (Vec<LabeledExample>, ExtractReport)
where
    F: Fn(&Position) -> Option<Evaluation> + Sync,
{
    enum Outcome {
        Ok(Vec<LabeledExample>, usize),
        Replay(ReplayError),
        Missing,
    }
    let per_game = |(game_id, game): &(u64, GameRecord)| -> Outcome {
        let plies = match game.replay() {
            Ok(p) => p,
            Err(e) => return Outcome::Replay(e),
        };
        let mut out = Vec::new();
        for (ply, pos) in &plies {
            let Some(eval) = evals(pos) else { return Outcome::Missing };
            out.extend(examples_for_position(*game_id, *ply as u32, pos, eval.pawns_white, filter));
        }
        Outcome::Ok(out, plies.len())
    };

    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(games.len().max(1));
    let chunk = games.len().div_ceil(workers).max(1);
    let outcomes: Vec<Outcome> = thread::scope(|scope| {
        let handles: Vec<_> = games
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(per_game).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("extraction worker panicked")).collect()
    });

    let mut report = ExtractReport::default();
    let mut examples = Vec::new();
    for outcome in outcomes {
        match outcome {
            Outcome::Ok(ex, positions) => {
                report.games_used += 1;
                report.positions += positions;
                examples.extend(ex);
            }
            Outcome::Replay(e) => {
                report.games_skipped += 1;
                report.replay_errors.push(e);
            }
            Outcome::Missing => {
                report.games_skipped += 1;
                report.missing_evals += 1;
            }
        }
    }
    examples.sort_by_key(|a| (a.game_id, a.ply, a.state));
    (examples, report)
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("unsupported file header '{found}', expected '{expected}'")]
    Version { found: String, expected: &'static str },
    #[error("malformed row {row}: {reason}")]
    Malformed { row: usize, reason: String },
    #[error("split needs at least 2 games, found {0}")]
    TooFewGames(usize),
    #[error("split fraction must be in (0, 1), got {0}")]
    InvalidFraction(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<EncodedExample>,
    pub validation: Vec<EncodedExample>,
    pub train_games: Vec<u64>,
    pub validation_games: Vec<u64>,
    pub seed: u64,
    pub fraction: f64,
}

/// Splits by game: a shuffled `fraction` of the games (at least one, and
/// leaving at least one) goes to training, the rest to validation.
pub fn split(examples: &[LabeledExample], fraction: f64, seed: u64) -> Result<DatasetSplit, DatasetError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(fraction));
    }
    let mut games: Vec<u64> = examples.iter().map(|e| e.game_id).collect::<BTreeSet<_>>().into_iter().collect();
    if games.len() < 2 {
        return Err(DatasetError::TooFewGames(games.len()));
    }
    SplitMix64::new(seed).shuffle(&mut games);
    let n_train = ((fraction * games.len() as f64).round() as usize).clamp(1, games.len() - 1);
    let mut train_games = games[..n_train].to_vec();
    let mut validation_games = games[n_train..].to_vec();
    train_games.sort_unstable();
    validation_games.sort_unstable();

    let (train, validation): (Vec<_>, Vec<_>) =
        examples.iter().partition(|e| train_games.binary_search(&e.game_id).is_ok());
    Ok(DatasetSplit {
        train: train.into_iter().map(LabeledExample::encode).collect(),
        validation: validation.into_iter().map(LabeledExample::encode).collect(),
        train_games,
        validation_games,
        seed,
        fraction,
    })
}

fn check_header(line: Option<io::Result<String>>, expected: &'static str) -> Result<(), DatasetError> {
    let found = line.transpose()?.unwrap_or_default();
    if found.trim_end() != expected {
        return Err(DatasetError::Version { found: found.trim_end().to_string(), expected });
    }
    Ok(())
}

pub fn write_dataset(mut out: impl Write, examples: &[LabeledExample]) -> io::Result<()> {
    writeln!(out, "{DATASET_HEADER}")?;
    for e in examples {
        writeln!(
            out,
            "{},{},{},{},{},{:.4}",
            e.game_id,
            e.ply,
            e.state.color.letter(),
            e.state.piece.letter(),
            e.state.square,
            e.target_pawns
        )?;
    }
    out.flush()
}

pub fn read_dataset(input: impl BufRead) -> Result<Vec<LabeledExample>, DatasetError> {
    let mut lines = input.lines();
    check_header(lines.next(), DATASET_HEADER)?;
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: &str| DatasetError::Malformed { row, reason: format!("{reason} in '{line}'") };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [game_id, ply, color, piece, square, target] = fields.as_slice() else {
            return Err(bad("expected 6 fields"));
        };
        let color = single_char(color).and_then(Color::from_letter).ok_or_else(|| bad("bad color"))?;
        let piece = single_char(piece)
            .filter(char::is_ascii_uppercase)
            .and_then(PieceKind::from_letter)
            .ok_or_else(|| bad("bad piece"))?;
        let square: Square = square.parse().map_err(|_| bad("bad square"))?;
        let target_pawns: f64 = target.parse().map_err(|_| bad("bad target"))?;
        if !target_pawns.is_finite() || target_pawns.abs() > MATE_CAP {
            return Err(bad("target out of range"));
        }
        out.push(LabeledExample {
            state: PieceState::new(color, piece, square),
            target_pawns,
            game_id: game_id.parse().map_err(|_| bad("bad game id"))?,
            ply: ply.parse().map_err(|_| bad("bad ply"))?,
        });
    }
    Ok(out)
}

fn single_char(s: &str) -> Option<char> {
    let mut chars = s.chars();
    let c = chars.next()?;
    chars.next().is_none().then_some(c)
}

pub fn save_dataset(path: &Path, examples: &[LabeledExample]) -> Result<(), DatasetError> {
    write_dataset(BufWriter::new(fs::File::create(path)?), examples)?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<Vec<LabeledExample>, DatasetError> {
    read_dataset(BufReader::new(fs::File::open(path)?))
}

/// One labeled position from the evals file.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRecord {
    pub game_id: u64,
    pub ply: u32,
    pub fen: String,
    pub pawns_white: f64,
    pub kind: ScoreKind,
    pub depth: u32,
}

impl EvalRecord {
    pub fn new(game_id: u64, ply: u32, position: &Position, eval: &Evaluation) -> Self {
        EvalRecord {
            game_id,
            ply,
            fen: position.to_fen(),
            pawns_white: eval.pawns_white,
            kind: eval.kind,
            depth: eval.depth_reached,
        }
    }
}

pub fn write_evals(mut out: impl Write, records: &[EvalRecord]) -> io::Result<()> {
    writeln!(out, "{EVALS_HEADER}")?;
    for r in records {
        let kind = match r.kind {
            ScoreKind::Centipawn => "cp",
            ScoreKind::MateCapped => "mate",
        };
        writeln!(out, "{},{},{},{:.4},{},{}", r.game_id, r.ply, r.fen, r.pawns_white, kind, r.depth)?;
    }
    out.flush()
}

pub fn read_evals(input: impl BufRead) -> Result<Vec<EvalRecord>, DatasetError> {
    let mut lines = input.lines();
    check_header(lines.next(), EVALS_HEADER)?;
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| DatasetError::Malformed { row, reason };
        let fields: Vec<&str> = line.split(',').collect();
        let [game_id, ply, fen, pawns, kind, depth] = fields.as_slice() else {
            return Err(bad(format!("expected 6 fields in '{line}'")));
        };
        Position::from_fen(fen).map_err(|e| bad(e.to_string()))?;
        let pawns_white: f64 = pawns.parse().map_err(|_| bad(format!("bad evaluation '{pawns}'")))?;
        if !pawns_white.is_finite() || pawns_white.abs() > MATE_CAP {
            return Err(bad(format!("evaluation out of range '{pawns}'")));
        }
        out.push(EvalRecord {
            game_id: game_id.parse().map_err(|_| bad(format!("bad game id '{game_id}'")))?,
            ply: ply.parse().map_err(|_| bad(format!("bad ply '{ply}'")))?,
            fen: fen.to_string(),
            pawns_white,
            kind: match *kind {
                "cp" => ScoreKind::Centipawn,
                "mate" => ScoreKind::MateCapped,
                other => return Err(bad(format!("bad score kind '{other}'"))),
            },
            depth: depth.parse().map_err(|_| bad(format!("bad depth '{depth}'")))?,
        });
    }
    Ok(out)
}

pub fn save_evals(path: &Path, records: &[EvalRecord]) -> Result<(), DatasetError> {
    write_evals(BufWriter::new(fs::File::create(path)?), records)?;
    Ok(())
}

pub fn load_evals(path: &Path) -> Result<Vec<EvalRecord>, DatasetError> {
    read_evals(BufReader::new(fs::File::open(path)?))
}

/// Examples for every evals row, in (game id, ply, state) order.
pub fn examples_from_evals(records: &[EvalRecord], filter: &StateFilter) -> Vec<LabeledExample> {
    let mut out = Vec::new();
    for r in records {
        let pos = Position::from_fen(&r.fen).expect("evals rows are validated on load");
        out.extend(examples_for_position(r.game_id, r.ply, &pos, r.pawns_white, filter));
    }
    out.sort_by_key(|a| (a.game_id, a.ply, a.state));
    out
}

/// Example counts per (color, piece), canonical order, zero counts omitted.
pub fn counts_by_kind(examples: &[LabeledExample]) -> BTreeMap<(Color, PieceKind), usize> {
    let mut counts = BTreeMap::new();
    for e in examples {
        *counts.entry((e.state.color, e.state.piece)).or_insert(0) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgn::parse_pgn_str;

    fn sq(s: &str) -> Square {
        s.parse().unwrap()
    }

    fn decode(x: &[f64]) -> PieceState {
        let hot = |range: std::ops::Range<usize>| range.clone().find(|&i| x[i] == 1.0).unwrap() - range.start;
        PieceState::new(Color::ALL[hot(0..2)], PieceKind::ALL[hot(2..8)], Square::from_index(hot(8..72)))
    }

    fn ones(x: &[f64]) -> Vec<usize> {
        x.iter().enumerate().filter(|(_, v)| **v == 1.0).map(|(i, _)| i).collect()
    }

    #[test]
    fn encode_layout() {
        assert_eq!(ones(&encode(&PieceState::new(Color::White, PieceKind::Knight, sq("f5")))), [0, 6, 45]);
        assert_eq!(ones(&encode(&PieceState::new(Color::Black, PieceKind::Pawn, sq("a1")))), [1, 7, 8]);
    }

    #[test]
    fn encode_is_injective_and_decodable() {
        let vectors: BTreeSet<Vec<u64>> = PieceState::all()
            .map(|s| {
                let x = encode(&s);
                assert_eq!(x.len(), INPUT_DIM);
                assert_eq!(x.iter().sum::<f64>(), 3.0);
                assert_eq!(decode(&x), s);
                x.iter().map(|v| v.to_bits()).collect()
            })
            .collect();
        assert_eq!(vectors.len(), 768);
    }

    fn eval(pawns_white: f64) -> Evaluation {
        Evaluation { pawns_white, kind: ScoreKind::Centipawn, depth_reached: 1, raw_cp: None, mate_in: None }
    }

    #[test]
    fn color_relative_targets() {
        let fig1 = Position::from_fen("8/8/8/5N2/8/8/8/8 w - - 0 1").unwrap();
        let knights = StateFilter::only(&[PieceKind::Knight]);
        let ex = examples_for_position(0, 0, &fig1, 0.5, &knights);
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].state, PieceState::new(Color::White, PieceKind::Knight, sq("f5")));
        assert_eq!(ex[0].target_pawns, 0.5);

        let black = Position::from_fen("8/8/8/5n2/8/8/8/8 w - - 0 1").unwrap();
        assert_eq!(examples_for_position(0, 0, &black, 0.5, &knights)[0].target_pawns, -0.5);
    }

    #[test]
    fn start_position_knights() {
        let ex = examples_for_position(3, 0, &Position::startpos(), 0.2, &"knights".parse().unwrap());
        let squares: Vec<String> = ex.iter().map(|e| format!("{}{}", e.state.color.letter(), e.state.square)).collect();
        assert_eq!(squares, ["Wb1", "Wg1", "Bb8", "Bg8"]);
        assert!(ex.iter().all(|e| e.target_pawns == 0.2 * e.state.color.sign()));
    }

    #[test]
    fn filters_parse() {
        assert_eq!("all".parse::<StateFilter>().unwrap(), StateFilter::all());
        assert_eq!(
            "knights,bishops".parse::<StateFilter>().unwrap(),
            StateFilter::only(&[PieceKind::Knight, PieceKind::Bishop])
        );
        assert_eq!("P".parse::<StateFilter>().unwrap(), StateFilter::only(&[PieceKind::Pawn]));
        assert_eq!("N,B".parse::<StateFilter>().unwrap().to_string(), "B,N");
        assert!("dragons".parse::<StateFilter>().is_err());
        assert!("".parse::<StateFilter>().is_err());
    }

    #[test]
    fn extraction_skips_bad_games_and_orders_output() {
        let text = "1. e4 e5 *\n\n1. Ke2 *\n\n1. Nf3 *\n";
        let games: Vec<(u64, GameRecord)> =
            parse_pgn_str(text).map(Result::unwrap).enumerate().map(|(i, g)| (i as u64, g)).collect();
        let (ex, report) = extract_examples(&games, |_| Some(eval(0.3)), &StateFilter::only(&[PieceKind::Knight]));
        assert_eq!(report.games_used, 2);
        assert_eq!(report.games_skipped, 1);
        assert_eq!(report.replay_errors[0].ply, 1);
        assert_eq!(report.positions, 5);
        assert_eq!(ex.len(), 5 * 4);
        assert!(ex.windows(2).all(|w| (w[0].game_id, w[0].ply, w[0].state) < (w[1].game_id, w[1].ply, w[1].state)));
    }

    #[test]
    fn extraction_counts_missing_evals() {
        let games: Vec<(u64, GameRecord)> = parse_pgn_str("1. e4 *").map(Result::unwrap).map(|g| (0, g)).collect();
        let (ex, report) =
            extract_examples(&games, |p| (p.side_to_move() == Color::White).then(|| eval(0.1)), &StateFilter::all());
        assert!(ex.is_empty());
        assert_eq!(report.missing_evals, 1);
    }

    fn synthetic(games: u64) -> Vec<LabeledExample> {
        (0..games)
            .flat_map(|g| {
                (0..3).map(move |ply| LabeledExample {
                    state: PieceState::new(
                        Color::White,
                        PieceKind::Knight,
                        Square::from_index((g * 3 + ply) as usize % 64),
                    ),
                    target_pawns: 0.1,
                    game_id: g,
                    ply: ply as u32,
                })
            })
            .collect()
    }

    #[test]
    fn split_by_game() {
        let ex = synthetic(10);
        let s = split(&ex, 0.8, 7).unwrap();
        assert_eq!((s.train_games.len(), s.validation_games.len()), (8, 2));
        assert_eq!((s.train.len(), s.validation.len()), (24, 6));
        assert_eq!(split(&ex, 0.8, 7).unwrap(), s);
        assert!(s.train_games.iter().all(|g| !s.validation_games.contains(g)));

        let two = split(&synthetic(2), 0.5, 1).unwrap();
        assert_eq!((two.train_games.len(), two.validation_games.len()), (1, 1));
        assert!(matches!(split(&synthetic(1), 0.5, 1), Err(DatasetError::TooFewGames(1))));
        assert!(matches!(split(&ex, 1.0, 1), Err(DatasetError::InvalidFraction(_))));
    }

    #[test]
    fn dataset_file_round_trip() {
        let ex = vec![
            LabeledExample {
                state: PieceState::new(Color::White, PieceKind::Knight, sq("f5")),
                target_pawns: 0.5,
                game_id: 0,
                ply: 3,
            },
            LabeledExample {
                state: PieceState::new(Color::Black, PieceKind::Pawn, sq("a7")),
                target_pawns: -1.25,
                game_id: 1,
                ply: 0,
            },
            LabeledExample {
                state: PieceState::new(Color::Black, PieceKind::King, sq("e8")),
                target_pawns: 10.0,
                game_id: 12,
                ply: 99,
            },
        ];
        let mut buf = Vec::new();
        write_dataset(&mut buf, &ex).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("squareval-dataset v1\n0,3,W,N,f5,0.5000\n"));
        assert_eq!(read_dataset(&buf[..]).unwrap(), ex);

        let mut empty = Vec::new();
        write_dataset(&mut empty, &[]).unwrap();
        assert_eq!(empty, b"squareval-dataset v1\n");
        assert!(read_dataset(&empty[..]).unwrap().is_empty());
    }

    #[test]
    fn dataset_file_errors() {
        assert!(matches!(read_dataset(&b"squareval-dataset v2\n"[..]), Err(DatasetError::Version { .. })));
        assert!(matches!(read_dataset(&b""[..]), Err(DatasetError::Version { .. })));
        let bad = b"squareval-dataset v1\n0,0,W,N,f5,0.1\n0,0,W,X,f5,0.1\n";
        assert!(matches!(read_dataset(&bad[..]), Err(DatasetError::Malformed { row: 2, .. })));
        let bad = b"squareval-dataset v1\n0,0,W,N,f5,11.0\n";
        assert!(matches!(read_dataset(&bad[..]), Err(DatasetError::Malformed { row: 1, .. })));
    }

    #[test]
    fn evals_file_round_trip_and_examples() {
        let start = Position::startpos();
        let records = vec![
            EvalRecord::new(0, 0, &start, &eval(0.2)),
            EvalRecord { kind: ScoreKind::MateCapped, ..EvalRecord::new(0, 1, &start, &eval(-10.0)) },
        ];
        let mut buf = Vec::new();
        write_evals(&mut buf, &records).unwrap();
        assert_eq!(read_evals(&buf[..]).unwrap(), records);
        assert_eq!(examples_from_evals(&records[..1], &StateFilter::all()).len(), 32);
        assert_eq!(examples_from_evals(&records[..1], &"N".parse().unwrap()).len(), 4);
        let bad = b"squareval-evals v1\n0,0,not a fen,0.1,cp,3\n";
        assert!(matches!(read_evals(&bad[..]), Err(DatasetError::Malformed { row: 1, .. })));
    }

    #[test]
    fn counts() {
        let ex = examples_for_position(0, 0, &Position::startpos(), 0.0, &StateFilter::all());
        let counts = counts_by_kind(&ex);
        assert_eq!(counts[&(Color::White, PieceKind::Pawn)], 8);
        assert_eq!(counts[&(Color::Black, PieceKind::King)], 1);
        assert_eq!(counts.values().sum::<usize>(), 32);
    }
}
