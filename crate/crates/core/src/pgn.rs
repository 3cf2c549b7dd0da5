//! PGN import: a lazy, line-oriented reader that turns a concatenation of
//! games into [`GameRecord`]s, keeping only the mainline SAN tokens.
//!
//! Comments, recursive variations, NAGs, move numbers and `%` escape lines are
//! dropped. A game that fails to parse is reported as [`PgnError::Game`] and
//! the reader resynchronises on the next termination marker or tag section.

use std::collections::VecDeque;
use std::fmt;
use std::io::{self, BufRead};

use thiserror::Error;

use crate::board::{FenError, Position, SanError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GameResult {
    WhiteWin,
    BlackWin,
    Draw,
    Unknown,
}

impl GameResult {
    fn from_token(token: &str) -> Option<GameResult> {
        match token {
            "1-0" => Some(GameResult::WhiteWin),
            "0-1" => Some(GameResult::BlackWin),
            "1/2-1/2" => Some(GameResult::Draw),
            "*" => Some(GameResult::Unknown),
            _ => None,
        }
    }
}

impl fmt::Display for GameResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameResult::WhiteWin => "1-0",
            GameResult::BlackWin => "0-1",
            GameResult::Draw => "1/2-1/2",
            GameResult::Unknown => "*",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameRecord {
    /// Tag pairs in file order.
    pub tags: Vec<(String, String)>,
    pub san_moves: Vec<String>,
    pub result: GameResult,
}

#[derive(Debug, Error)]
pub enum PgnError {
    /// Game `index` (0-based, counting every game in the stream) was skipped.
    #[error("game {index}: {reason}")]
    Game { index: usize, reason: String },
    #[error("PGN stream error: {0}")]
    Stream(#[from] io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReplayFailure {
    #[error("invalid FEN tag: {0}")]
    Fen(#[from] FenError),
    #[error(transparent)]
    San(#[from] SanError),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("replay of {} failed at ply {ply}: {failure}", describe(.tags))]
pub struct ReplayError {
    pub ply: usize,
    pub tags: Vec<(String, String)>,
    pub failure: ReplayFailure,
}

fn describe(tags: &[(String, String)]) -> String {
    let get = |k: &str| tags.iter().find(|(n, _)| n == k).map(|(_, v)| v.as_str()).unwrap_or("?");
    format!("'{}' ({} - {}, round {})", get("Event"), get("White"), get("Black"), get("Round"))
}

impl GameRecord {
    pub fn tag(&self, name: &str) -> Option<&str> {
        self.tags.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }

    /// The `[FEN]` tag when present, otherwise the standard start position.
    pub fn start_position(&self) -> Result<Position, ReplayError> {
        match self.tag("FEN") {
            Some(fen) => {
                Position::from_fen(fen).map_err(|e| ReplayError { ply: 0, tags: self.tags.clone(), failure: e.into() })
            }
            None => Ok(Position::startpos()),
        }
    }

    /// Positions before each move plus the final one: `san_moves.len() + 1` entries.
    pub fn replay(&self) -> Result<Vec<(usize, Position)>, ReplayError> {
        let mut pos = self.start_position()?;
        let mut out = Vec::with_capacity(self.san_moves.len() + 1);
        for (i, san) in self.san_moves.iter().enumerate() {
            let ply = i + 1;
            let next = pos
                .resolve_san(san)
                .map(|m| pos.apply_move(&m).expect("resolved SAN is legal"))
                .map_err(|e| ReplayError { ply, tags: self.tags.clone(), failure: e.into() })?;
            out.push((i, std::mem::replace(&mut pos, next)));
        }
        out.push((self.san_moves.len(), pos));
        Ok(out)
    }
}

#[derive(Default)]
struct PartialGame {
    tags: Vec<(String, String)>,
    moves: Vec<String>,
    in_movetext: bool,
    depth: usize,
    in_comment: bool,
    error: Option<String>,
}

impl PartialGame {
    fn is_blank(&self) -> bool {
        self.tags.is_empty() && !self.in_movetext && self.error.is_none()
    }

    fn fail(&mut self, reason: impl Into<String>) {
        self.error.get_or_insert_with(|| reason.into());
    }
}

/// Lazy PGN reader over any buffered byte source.
pub struct PgnReader<R> {
    source: R,
    line: Vec<u8>,
    game: PartialGame,
    index: usize,
    pending: VecDeque<Result<GameRecord, PgnError>>,
    done: bool,
}

/// Parses every game in `text`, in order.
pub fn parse_pgn_str(text: &str) -> PgnReader<&[u8]> {
    PgnReader::new(text.as_bytes())
}

impl<R: BufRead> PgnReader<R> {
    pub fn new(source: R) -> Self {
        PgnReader {
            source,
            line: Vec::new(),
            game: PartialGame::default(),
            index: 0,
            pending: VecDeque::new(),
            done: false,
        }
    }

    fn finish_game(&mut self, result: Option<GameResult>) {
        let game = std::mem::take(&mut self.game);
        let index = self.index;
        self.index += 1;
        let outcome = match (game.error, result) {
            (Some(reason), _) => Err(PgnError::Game { index, reason }),
            (None, None) => Err(PgnError::Game { index, reason: "missing termination marker".into() }),
            (None, Some(result)) => Ok(GameRecord { tags: game.tags, san_moves: game.moves, result }),
        };
        self.pending.push_back(outcome);
    }

    fn process_line(&mut self, raw: &str) {
        let line = raw.trim_end_matches(['\n', '\r']);
        if self.game.in_comment {
            if looks_like_tag(line) {
                self.game.fail("unterminated comment");
                self.finish_game(None);
            } else {
                if let Some(end) = line.find('}') {
                    self.game.in_comment = false;
                    self.process_movetext(&line[end + 1..]);
                }
                return;
            }
        }
        if line.starts_with('%') {
            return;
        }
        let trimmed = line.trim_start();
        if trimmed.starts_with('[') {
            if self.game.in_movetext {
                self.finish_game(None);
            }
            match parse_tag(trimmed) {
                Some(tag) => self.game.tags.push(tag),
                None => self.game.fail(format!("malformed tag pair: {trimmed}")),
            }
            return;
        }
        self.process_movetext(line);
    }

    fn process_movetext(&mut self, text: &str) {
        let mut rest = text;
        loop {
            rest = rest.trim_start();
            let Some(c) = rest.chars().next() else { return };
            match c {
                '{' => match rest.find('}') {
                    Some(end) => rest = &rest[end + 1..],
                    None => {
                        self.game.in_comment = true;
                        return;
                    }
                },
                ';' => return,
                '(' => {
                    self.game.in_movetext = true;
                    self.game.depth += 1;
                    rest = &rest[1..];
                }
                ')' => {
                    if self.game.depth == 0 {
                        self.game.fail("unbalanced ')'");
                    } else {
                        self.game.depth -= 1;
                    }
                    rest = &rest[1..];
                }
                '$' => {
                    let end = rest[1..].find(|c: char| !c.is_ascii_digit()).map_or(rest.len(), |e| e + 1);
                    if end == 1 {
                        self.game.fail("empty NAG");
                    }
                    self.game.in_movetext = true;
                    rest = &rest[end..];
                }
                _ => {
                    let end = rest.find(|c: char| c.is_whitespace() || "{}();$".contains(c)).unwrap_or(rest.len());
                    let token = &rest[..end];
                    rest = &rest[end..];
                    self.game.in_movetext = true;
                    self.handle_token(token);
                }
            }
        }
    }

    fn handle_token(&mut self, token: &str) {
        if let Some(result) = GameResult::from_token(token) {
            if self.game.depth == 0 {
                self.finish_game(Some(result));
            } else {
                self.game.fail(format!("termination marker '{token}' inside a variation"));
            }
            return;
        }
        // Move numbers: "12." / "12..." possibly glued to the move ("12.Nf3").
        let san = token.trim_start_matches(|c: char| c.is_ascii_digit());
        let san = if san.len() < token.len() && san.starts_with('.') {
            san.trim_start_matches('.')
        } else if san.len() < token.len() && san.is_empty() {
            ""
        } else {
            token
        };
        if san.is_empty() || san.chars().all(|c| c == '!' || c == '?') {
            return;
        }
        if !is_san_shaped(san) {
            self.game.fail(format!("unexpected token '{token}'"));
            return;
        }
        if self.game.depth == 0 {
            self.game.moves.push(san.to_string());
        }
    }
}

fn is_san_shaped(token: &str) -> bool {
    let first_ok =
        token.chars().next().is_some_and(|c| matches!(c, 'a'..='h' | 'K' | 'Q' | 'R' | 'B' | 'N' | 'O' | '0' | '-'));
    first_ok
        && token
            .chars()
            .all(|c| matches!(c, 'a'..='h' | '1'..='8' | 'K' | 'Q' | 'R' | 'B' | 'N' | 'O' | '0' | 'x' | ':' | '=' | '+' | '#' | '!' | '?' | '-' | '.' | 'p'))
}

fn looks_like_tag(line: &str) -> bool {
    let t = line.trim();
    t.starts_with('[') && t.ends_with(']') && parse_tag(t).is_some()
}

/// `[Name "value"]` with `\"` and `\\` escapes in the value.
fn parse_tag(line: &str) -> Option<(String, String)> {
    let inner = line.trim().strip_prefix('[')?.strip_suffix(']')?.trim();
    let (name, value) = inner.split_once(|c: char| c.is_whitespace())?;
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return None;
    }
    let value = value.trim().strip_prefix('"')?.strip_suffix('"')?;
    let mut out = String::with_capacity(value.len());
    let mut chars = value.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => out.push(chars.next()?),
            '"' => return None,
            _ => out.push(c),
        }
    }
    Some((name.to_string(), out))
}

impl<R: BufRead> Iterator for PgnReader<R> {
    type Item = Result<GameRecord, PgnError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(item) = self.pending.pop_front() {
                return Some(item);
            }
            if self.done {
                return None;
            }
            self.line.clear();
            match self.source.read_until(b'\n', &mut self.line) {
                Ok(0) => {
                    self.done = true;
                    if self.game.in_comment {
                        self.game.fail("unterminated comment at end of input");
                    }
                    if !self.game.is_blank() {
                        self.finish_game(None);
                    }
                }
                Ok(_) => {
                    let line = String::from_utf8_lossy(&self.line).into_owned();
                    self.process_line(&line);
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(PgnError::Stream(e)));
                }
            }
        }
    }
}
