//! Chess domain core: board representation, FEN, legal move generation and
//! SAN resolution.
//!
//! Everything here is value-semantic. A [`Position`] is a plain 64-square
//! mailbox plus the state needed by the rules (castling rights, en-passant
//! target, clocks); applying a move returns a new position.

mod fen;
mod movegen;
mod san;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use fen::{FenError, START_FEN};
pub use movegen::perft;
pub use san::SanError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub const ALL: [Color; 2] = [Color::White, Color::Black];

    pub fn opposite(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }

    /// `W` or `B`.
    pub fn letter(self) -> char {
        match self {
            Color::White => 'W',
            Color::Black => 'B',
        }
    }

    pub fn from_letter(c: char) -> Option<Color> {
        match c {
            'W' | 'w' => Some(Color::White),
            'B' | 'b' => Some(Color::Black),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// +1 for White, -1 for Black.
    pub fn sign(self) -> f64 {
        match self {
            Color::White => 1.0,
            Color::Black => -1.0,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::White => "white",
            Color::Black => "black",
        })
    }
}

impl FromStr for Color {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "w" | "white" => Ok(Color::White),
            "b" | "black" => Ok(Color::Black),
            _ => Err(format!("unknown color '{s}'")),
        }
    }
}

/// Piece kinds in canonical order: K, Q, R, B, N, P.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PieceKind {
    King,
    Queen,
    Rook,
    Bishop,
    Knight,
    Pawn,
}

impl PieceKind {
    pub const ALL: [PieceKind; 6] =
        [PieceKind::King, PieceKind::Queen, PieceKind::Rook, PieceKind::Bishop, PieceKind::Knight, PieceKind::Pawn];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Upper-case SAN letter (`P` for pawns).
    pub fn letter(self) -> char {
        match self {
            PieceKind::King => 'K',
            PieceKind::Queen => 'Q',
            PieceKind::Rook => 'R',
            PieceKind::Bishop => 'B',
            PieceKind::Knight => 'N',
            PieceKind::Pawn => 'P',
        }
    }

    pub fn from_letter(c: char) -> Option<PieceKind> {
        match c.to_ascii_uppercase() {
            'K' => Some(PieceKind::King),
            'Q' => Some(PieceKind::Queen),
            'R' => Some(PieceKind::Rook),
            'B' => Some(PieceKind::Bishop),
            'N' => Some(PieceKind::Knight),
            'P' => Some(PieceKind::Pawn),
            _ => None,
        }
    }
}

impl fmt::Display for PieceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PieceKind::King => "king",
            PieceKind::Queen => "queen",
            PieceKind::Rook => "rook",
            PieceKind::Bishop => "bishop",
            PieceKind::Knight => "knight",
            PieceKind::Pawn => "pawn",
        })
    }
}

impl FromStr for PieceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let kind = match lower.as_str() {
            "king" => Some(PieceKind::King),
            "queen" => Some(PieceKind::Queen),
            "rook" => Some(PieceKind::Rook),
            "bishop" => Some(PieceKind::Bishop),
            "knight" => Some(PieceKind::Knight),
            "pawn" => Some(PieceKind::Pawn),
            _ if s.len() == 1 => PieceKind::from_letter(s.chars().next().unwrap()),
            _ => None,
        };
        kind.ok_or_else(|| format!("unknown piece '{s}'"))
    }
}

/// A board square, indexed `file + 8 * rank` (a1 = 0, h8 = 63).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Square(u8);

impl Square {
    pub fn new(file: u8, rank: u8) -> Square {
        assert!(file < 8 && rank < 8, "square out of range: file {file}, rank {rank}");
        Square(file + 8 * rank)
    }

    pub fn from_index(index: usize) -> Square {
        assert!(index < 64, "square index out of range: {index}");
        Square(index as u8)
    }

    pub fn all() -> impl Iterator<Item = Square> {
        (0..64u8).map(Square)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// 0 = a-file.
    pub fn file(self) -> u8 {
        self.0 % 8
    }

    /// 0 = first rank.
    pub fn rank(self) -> u8 {
        self.0 / 8
    }

    pub(crate) fn offset(self, df: i8, dr: i8) -> Option<Square> {
        let f = self.file() as i8 + df;
        let r = self.rank() as i8 + dr;
        ((0..8).contains(&f) && (0..8).contains(&r)).then(|| Square::new(f as u8, r as u8))
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", (b'a' + self.file()) as char, self.rank() + 1)
    }
}

impl FromStr for Square {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.as_bytes() {
            [f @ b'a'..=b'h', r @ b'1'..=b'8'] => Ok(Square::new(f - b'a', r - b'1')),
            _ => Err(format!("invalid square '{s}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Piece {
    pub color: Color,
    pub kind: PieceKind,
}

impl Piece {
    pub fn new(color: Color, kind: PieceKind) -> Piece {
        Piece { color, kind }
    }

    /// FEN letter: upper case for White.
    pub fn fen_char(self) -> char {
        match self.color {
            Color::White => self.kind.letter(),
            Color::Black => self.kind.letter().to_ascii_lowercase(),
        }
    }
}

/// One (color, piece, square) state: the unit that gets valued.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PieceState {
    pub color: Color,
    pub piece: PieceKind,
    pub square: Square,
}

impl PieceState {
    pub fn new(color: Color, piece: PieceKind, square: Square) -> PieceState {
        PieceState { color, piece, square }
    }

    /// All 768 states in canonical (color, piece, square) order.
    pub fn all() -> impl Iterator<Item = PieceState> {
        Color::ALL.into_iter().flat_map(|color| {
            PieceKind::ALL
                .into_iter()
                .flat_map(move |piece| Square::all().map(move |square| PieceState::new(color, piece, square)))
        })
    }
}

impl fmt::Display for PieceState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.color, self.piece, self.square)
    }
}

/// Castling rights as a bit set over WK, WQ, BK, BQ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CastlingRights(u8);

impl CastlingRights {
    pub const WHITE_KINGSIDE: CastlingRights = CastlingRights(1);
    pub const WHITE_QUEENSIDE: CastlingRights = CastlingRights(2);
    pub const BLACK_KINGSIDE: CastlingRights = CastlingRights(4);
    pub const BLACK_QUEENSIDE: CastlingRights = CastlingRights(8);
    pub const NONE: CastlingRights = CastlingRights(0);
    pub const ALL: CastlingRights = CastlingRights(15);

    pub fn contains(self, other: CastlingRights) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn insert(&mut self, other: CastlingRights) {
        self.0 |= other.0;
    }

    pub fn remove(&mut self, other: CastlingRights) {
        self.0 &= !other.0;
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub(crate) fn kingside(color: Color) -> CastlingRights {
        match color {
            Color::White => Self::WHITE_KINGSIDE,
            Color::Black => Self::BLACK_KINGSIDE,
        }
    }

    pub(crate) fn queenside(color: Color) -> CastlingRights {
        match color {
            Color::White => Self::WHITE_QUEENSIDE,
            Color::Black => Self::BLACK_QUEENSIDE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Normal,
    EnPassant,
    CastleKingside,
    CastleQueenside,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub from: Square,
    pub to: Square,
    pub promotion: Option<PieceKind>,
    pub capture: bool,
    pub kind: MoveKind,
}

impl Move {
    /// Long algebraic (UCI) notation, e.g. `e2e4`, `e7e8q`, `e1g1`.
    pub fn uci(&self) -> String {
        let mut s = format!("{}{}", self.from, self.to);
        if let Some(p) = self.promotion {
            s.push(p.letter().to_ascii_lowercase());
        }
        s
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.uci())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("illegal move {mv} in position {fen}")]
pub struct IllegalMove {
    pub mv: String,
    pub fen: String,
}

/// A full board state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Position {
    board: [Option<Piece>; 64],
    side_to_move: Color,
    castling: CastlingRights,
    en_passant: Option<Square>,
    halfmove_clock: u32,
    fullmove_number: u32,
}

impl Default for Position {
    fn default() -> Self {
        Position::startpos()
    }
}

impl Position {
    pub fn startpos() -> Position {
        Position::from_fen(START_FEN).expect("start FEN is valid")
    }

    /// Board with no pieces, White to move.
    pub fn empty() -> Position {
        Position {
            board: [None; 64],
            side_to_move: Color::White,
            castling: CastlingRights::NONE,
            en_passant: None,
            halfmove_clock: 0,
            fullmove_number: 1,
        }
    }

    pub fn from_fen(text: &str) -> Result<Position, FenError> {
        fen::parse_fen(text)
    }

    pub fn to_fen(&self) -> String {
        fen::emit_fen(self)
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.board[sq.index()]
    }

    pub fn side_to_move(&self) -> Color {
        self.side_to_move
    }

    pub fn castling(&self) -> CastlingRights {
        self.castling
    }

    pub fn en_passant(&self) -> Option<Square> {
        self.en_passant
    }

    pub fn halfmove_clock(&self) -> u32 {
        self.halfmove_clock
    }

    pub fn fullmove_number(&self) -> u32 {
        self.fullmove_number
    }

    pub fn piece_count(&self) -> usize {
        self.board.iter().flatten().count()
    }

    /// Same placement and rights with the other side to move (en passant cleared).
    /// Meant for tests and perspective checks; the result may be an illegal position.
    pub fn with_side_to_move(&self, color: Color) -> Position {
        let mut p = self.clone();
        p.side_to_move = color;
        p.en_passant = None;
        p
    }

    pub fn legal_moves(&self) -> Vec<Move> {
        movegen::legal_moves(self)
    }

    pub fn is_check(&self) -> bool {
        movegen::in_check(self, self.side_to_move)
    }

    /// Applies `m`, which must be one of [`Position::legal_moves`].
    pub fn apply_move(&self, m: &Move) -> Result<Position, IllegalMove> {
        let legal =
            self.legal_moves().into_iter().find(|l| l.from == m.from && l.to == m.to && l.promotion == m.promotion);
        match legal {
            Some(l) => Ok(movegen::make_move(self, &l)),
            None => Err(IllegalMove { mv: m.uci(), fen: self.to_fen() }),
        }
    }

    /// Resolves a SAN token (`Nf3`, `exd5`, `e8=Q+`, `O-O`) against the legal moves.
    pub fn resolve_san(&self, san: &str) -> Result<Move, SanError> {
        san::resolve_san(self, san)
    }

    /// One state per occupied square in (color, piece, square) order.
    pub fn piece_states(&self) -> Vec<PieceState> {
        let mut states: Vec<PieceState> = self
            .board
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| PieceState::new(p.color, p.kind, Square::from_index(i))))
            .collect();
        states.sort();
        states
    }
}
