use thiserror::Error;

use super::{Move, MoveKind, PieceKind, Position, Square};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SanError {
    #[error("malformed SAN token '{0}'")]
    Malformed(String),
    #[error("no legal move matches '{0}'")]
    Illegal(String),
    #[error("SAN token '{san}' is ambiguous: {candidates:?}")]
    Ambiguous { san: String, candidates: Vec<String> },
}

struct SanPattern {
    piece: PieceKind,
    from_file: Option<u8>,
    from_rank: Option<u8>,
    to: Square,
    promotion: Option<PieceKind>,
}

/// Drops check/mate marks, annotation glyphs and a trailing "e.p.".
fn strip_suffixes(san: &str) -> &str {
    let s = san.trim();
    let s = s.strip_suffix("e.p.").unwrap_or(s);
    s.trim_end_matches(['+', '#', '!', '?'])
}

fn parse_pattern(core: &str) -> Option<SanPattern> {
    let bytes = core.as_bytes();
    let (piece, rest) = match bytes.first()? {
        c @ (b'K' | b'Q' | b'R' | b'B' | b'N') => (PieceKind::from_letter(*c as char)?, &core[1..]),
        _ => (PieceKind::Pawn, core),
    };
    let rest = rest.replace(['x', ':'], "");

    // Promotion suffix: "=Q", or a bare trailing piece letter as in "e8Q".
    let (body, promotion) = match rest.rsplit_once('=') {
        Some((body, promo)) => {
            let mut chars = promo.chars();
            let kind = PieceKind::from_letter(chars.next()?)?;
            if chars.next().is_some() {
                return None;
            }
            (body.to_string(), Some(kind))
        }
        None => match rest.chars().last() {
            Some(c @ ('Q' | 'R' | 'B' | 'N')) if piece == PieceKind::Pawn => {
                (rest[..rest.len() - 1].to_string(), PieceKind::from_letter(c))
            }
            _ => (rest, None),
        },
    };
    if matches!(promotion, Some(PieceKind::King | PieceKind::Pawn)) {
        return None;
    }
    if body.len() < 2 {
        return None;
    }
    let (disambig, target) = body.split_at(body.len() - 2);
    let to: Square = target.parse().ok()?;
    let mut from_file = None;
    let mut from_rank = None;
    for c in disambig.chars() {
        match c {
            'a'..='h' if from_file.is_none() => from_file = Some(c as u8 - b'a'),
            '1'..='8' if from_rank.is_none() => from_rank = Some(c as u8 - b'1'),
            _ => return None,
        }
    }
    Some(SanPattern { piece, from_file, from_rank, to, promotion })
}

pub(super) fn resolve_san(p: &Position, san: &str) -> Result<Move, SanError> {
    let core = strip_suffixes(san);
    let castle = match core {
        "O-O" | "0-0" => Some(MoveKind::CastleKingside),
        "O-O-O" | "0-0-0" => Some(MoveKind::CastleQueenside),
        _ => None,
    };
    let legal = p.legal_moves();
    let candidates: Vec<Move> = if let Some(kind) = castle {
        legal.into_iter().filter(|m| m.kind == kind).collect()
    } else {
        let pat = parse_pattern(core).ok_or_else(|| SanError::Malformed(san.to_string()))?;
        legal
            .into_iter()
            .filter(|m| {
                m.to == pat.to
                    && m.kind != MoveKind::CastleKingside
                    && m.kind != MoveKind::CastleQueenside
                    && p.piece_at(m.from).is_some_and(|pc| pc.kind == pat.piece)
                    && pat.from_file.is_none_or(|f| m.from.file() == f)
                    && pat.from_rank.is_none_or(|r| m.from.rank() == r)
                    && m.promotion == pat.promotion
            })
            .collect()
    };
    match candidates.as_slice() {
        [m] => Ok(*m),
        [] => Err(SanError::Illegal(san.to_string())),
        many => Err(SanError::Ambiguous { san: san.to_string(), candidates: many.iter().map(Move::uci).collect() }),
    }
}
