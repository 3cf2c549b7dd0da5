use thiserror::Error;

use super::{CastlingRights, Color, Piece, PieceKind, Position, Square};

pub const START_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

/// A FEN record that could not be parsed. `offset` is the byte offset into the input.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid FEN ({field} field, offset {offset}): {reason}")]
pub struct FenError {
    pub field: &'static str,
    pub offset: usize,
    pub reason: String,
}

fn err(field: &'static str, offset: usize, reason: impl Into<String>) -> FenError {
    FenError { field, offset, reason: reason.into() }
}

/// Splits on ASCII whitespace, keeping each token's byte offset.
fn fields(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_ascii_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &text[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &text[s..]));
    }
    out
}

pub(super) fn parse_fen(text: &str) -> Result<Position, FenError> {
    let fields = fields(text);
    if fields.len() != 6 {
        return Err(err("record", 0, format!("expected 6 fields, found {}", fields.len())));
    }
    let mut pos = Position::empty();

    let (base, placement) = fields[0];
    let ranks: Vec<&str> = placement.split('/').collect();
    if ranks.len() != 8 {
        return Err(err("placement", base, format!("expected 8 ranks, found {}", ranks.len())));
    }
    let mut offset = base;
    for (i, rank_text) in ranks.iter().enumerate() {
        let rank = 7 - i as u8;
        let mut file = 0u8;
        for (j, c) in rank_text.char_indices() {
            let at = offset + j;
            if let Some(d) = c.to_digit(10) {
                if !(1..=8).contains(&d) {
                    return Err(err("placement", at, format!("invalid empty-square count '{c}'")));
                }
                file += d as u8;
            } else {
                let kind = PieceKind::from_letter(c)
                    .filter(|_| c.is_ascii_alphabetic())
                    .ok_or_else(|| err("placement", at, format!("invalid piece letter '{c}'")))?;
                if file >= 8 {
                    return Err(err("placement", at, format!("rank {} is longer than 8 squares", rank + 1)));
                }
                let color = if c.is_ascii_uppercase() { Color::White } else { Color::Black };
                pos.board[Square::new(file, rank).index()] = Some(Piece::new(color, kind));
                file += 1;
            }
            if file > 8 {
                return Err(err("placement", at, format!("rank {} is longer than 8 squares", rank + 1)));
            }
        }
        if file != 8 {
            return Err(err("placement", offset, format!("rank {} has {} squares, expected 8", rank + 1, file)));
        }
        offset += rank_text.len() + 1;
    }

    let (at, side) = fields[1];
    pos.side_to_move = match side {
        "w" => Color::White,
        "b" => Color::Black,
        _ => return Err(err("side", at, format!("expected 'w' or 'b', found '{side}'"))),
    };

    let (at, castling) = fields[2];
    if castling != "-" {
        for (j, c) in castling.char_indices() {
            let right = match c {
                'K' => CastlingRights::WHITE_KINGSIDE,
                'Q' => CastlingRights::WHITE_QUEENSIDE,
                'k' => CastlingRights::BLACK_KINGSIDE,
                'q' => CastlingRights::BLACK_QUEENSIDE,
                _ => return Err(err("castling", at + j, format!("unsupported castling token '{c}'"))),
            };
            if pos.castling.contains(right) {
                return Err(err("castling", at + j, format!("duplicate castling token '{c}'")));
            }
            pos.castling.insert(right);
        }
    }

    let (at, ep) = fields[3];
    if ep != "-" {
        let sq: Square = ep.parse().map_err(|e: String| err("en-passant", at, e))?;
        let expected_rank = match pos.side_to_move {
            Color::White => 5,
            Color::Black => 2,
        };
        if sq.rank() != expected_rank {
            return Err(err(
                "en-passant",
                at,
                format!("square {ep} is not on rank {} for {} to move", expected_rank + 1, pos.side_to_move),
            ));
        }
        pos.en_passant = Some(sq);
    }

    let (at, half) = fields[4];
    pos.halfmove_clock = half.parse().map_err(|_| err("halfmove", at, format!("invalid halfmove clock '{half}'")))?;
    let (at, full) = fields[5];
    pos.fullmove_number = full
        .parse()
        .ok()
        .filter(|&n: &u32| n >= 1)
        .ok_or_else(|| err("fullmove", at, format!("invalid fullmove number '{full}'")))?;

    for color in Color::ALL {
        let kings = pos.board.iter().flatten().filter(|p| p.color == color && p.kind == PieceKind::King).count();
        if kings > 1 {
            return Err(err("placement", base, format!("{color} has {kings} kings")));
        }
    }
    for (i, p) in pos.board.iter().enumerate() {
        let rank = i / 8;
        if matches!(p, Some(p) if p.kind == PieceKind::Pawn) && (rank == 0 || rank == 7) {
            return Err(err("placement", base, format!("pawn on back rank at {}", Square::from_index(i))));
        }
    }
    Ok(pos)
}

pub(super) fn emit_fen(p: &Position) -> String {
    let mut out = String::with_capacity(90);
    for rank in (0..8).rev() {
        let mut empty = 0;
        for file in 0..8 {
            match p.board[Square::new(file, rank).index()] {
                Some(piece) => {
                    if empty > 0 {
                        out.push(char::from(b'0' + empty));
                        empty = 0;
                    }
                    out.push(piece.fen_char());
                }
                None => empty += 1,
            }
        }
        if empty > 0 {
            out.push(char::from(b'0' + empty));
        }
        if rank > 0 {
            out.push('/');
        }
    }
    out.push(' ');
    out.push(match p.side_to_move {
        Color::White => 'w',
        Color::Black => 'b',
    });
    out.push(' ');
    if p.castling.is_empty() {
        out.push('-');
    } else {
        for (right, c) in [
            (CastlingRights::WHITE_KINGSIDE, 'K'),
            (CastlingRights::WHITE_QUEENSIDE, 'Q'),
            (CastlingRights::BLACK_KINGSIDE, 'k'),
            (CastlingRights::BLACK_QUEENSIDE, 'q'),
        ] {
            if p.castling.contains(right) {
                out.push(c);
            }
        }
    }
    out.push(' ');
    match p.en_passant {
        Some(sq) => out.push_str(&sq.to_string()),
        None => out.push('-'),
    }
    out.push_str(&format!(" {} {}", p.halfmove_clock, p.fullmove_number));
    out
}
