//! UCI engine client: sessions over child-process pipes, a pool that spreads
//! positions across sessions, and a scriptable mock engine for tests.
//!
//! Engines report scores from the side to move's point of view. Everything
//! returned from here is white-relative and in pawn units, clamped to
//! ±[`MATE_CAP`].

pub mod mock;
mod pool;
mod session;

use std::fmt;
use std::io;
use std::time::Duration;

use thiserror::Error;

use crate::board::Color;

pub use pool::{evaluate_batch, evaluate_batch_with_progress};
pub use session::{EngineSession, SessionConfig};

/// Pawn value assigned to forced mates; also the bound for every evaluation.
pub const MATE_CAP: f64 = 10.0;
/// Raw centipawn scores are clamped to this magnitude before conversion.
pub const CP_CLAMP: i32 = 1000;
pub const DEFAULT_DEPTH: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineLimits {
    Depth(u32),
    MoveTime { millis: u64 },
}

impl EngineLimits {
    pub fn depth(depth: u32) -> Result<Self, EngineError> {
        if depth == 0 {
            return Err(EngineError::InvalidLimits("depth must be at least 1".into()));
        }
        Ok(EngineLimits::Depth(depth))
    }

    pub fn movetime(millis: u64) -> Result<Self, EngineError> {
        if millis == 0 {
            return Err(EngineError::InvalidLimits("movetime must be at least 1 ms".into()));
        }
        Ok(EngineLimits::MoveTime { millis })
    }

    pub(crate) fn go_command(&self) -> String {
        match self {
            EngineLimits::Depth(d) => format!("go depth {d}"),
            EngineLimits::MoveTime { millis } => format!("go movetime {millis}"),
        }
    }
}

impl Default for EngineLimits {
    fn default() -> Self {
        EngineLimits::Depth(DEFAULT_DEPTH)
    }
}

impl fmt::Display for EngineLimits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineLimits::Depth(d) => write!(f, "depth {d}"),
            EngineLimits::MoveTime { millis } => write!(f, "movetime {millis}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScoreKind {
    Centipawn,
    MateCapped,
}

/// A UCI score as the engine printed it (side-to-move relative).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UciScore {
    Cp(i32),
    Mate(i32),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    /// White-relative advantage in pawns, within ±MATE_CAP.
    pub pawns_white: f64,
    pub kind: ScoreKind,
    pub depth_reached: u32,
    /// Centipawns exactly as reported, side-to-move relative.
    pub raw_cp: Option<i32>,
    /// Mate distance exactly as reported, side-to-move relative.
    pub mate_in: Option<i32>,
}

impl Evaluation {
    pub fn from_uci(score: UciScore, side_to_move: Color, depth_reached: u32) -> Evaluation {
        let sign = side_to_move.sign();
        match score {
            UciScore::Cp(cp) => Evaluation {
                pawns_white: sign * f64::from(cp.clamp(-CP_CLAMP, CP_CLAMP)) / 100.0,
                kind: ScoreKind::Centipawn,
                depth_reached,
                raw_cp: Some(cp),
                mate_in: None,
            },
            UciScore::Mate(n) => {
                // "mate 0" is printed when the side to move is already mated.
                let mover_wins = if n > 0 { 1.0 } else { -1.0 };
                Evaluation {
                    pawns_white: sign * mover_wins * MATE_CAP,
                    kind: ScoreKind::MateCapped,
                    depth_reached,
                    raw_cp: None,
                    mate_in: Some(n),
                }
            }
        }
    }
}

/// Depth and score from one `info` line, if it carries a score.
pub(crate) fn parse_info_score(line: &str) -> Option<(u32, UciScore)> {
    let mut tokens = line.split_whitespace();
    if tokens.next()? != "info" {
        return None;
    }
    let mut depth = 0;
    let mut score = None;
    while let Some(tok) = tokens.next() {
        match tok {
            "depth" => depth = tokens.next()?.parse().ok()?,
            "score" => {
                let kind = tokens.next()?;
                let value: i32 = tokens.next()?.parse().ok()?;
                score = match kind {
                    "cp" => Some(UciScore::Cp(value)),
                    "mate" => Some(UciScore::Mate(value)),
                    _ => return None,
                };
            }
            // The remainder is free text or a move list.
            "string" | "pv" => break,
            _ => {}
        }
    }
    score.map(|s| (depth, s))
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("failed to launch engine '{command}': {source}")]
    Launch { command: String, source: io::Error },
    #[error("engine timed out after {after:?} waiting for {waiting_for}")]
    Timeout { waiting_for: String, after: Duration },
    #[error("engine closed its output while waiting for {waiting_for}")]
    Eof { waiting_for: String },
    #[error("UCI protocol violation: {0}")]
    Protocol(String),
    #[error("engine I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("invalid search limits: {0}")]
    InvalidLimits(String),
    #[error("session is unusable after an earlier failure")]
    SessionDead,
    #[error("all {sessions} engine sessions failed; last error: {last}")]
    AllSessionsFailed { sessions: usize, last: Box<EngineError> },
    #[error("engine pool is empty")]
    EmptyPool,
}
