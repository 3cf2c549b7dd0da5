//! Legal move generation on the mailbox board: pseudo-legal moves filtered by
//! "does this leave my king attacked".

use super::{CastlingRights, Color, Move, MoveKind, Piece, PieceKind, Position, Square};

const KNIGHT_STEPS: [(i8, i8); 8] = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
const KING_STEPS: [(i8, i8); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const ROOK_DIRS: [(i8, i8); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const BISHOP_DIRS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
const PROMOTIONS: [PieceKind; 4] = [PieceKind::Queen, PieceKind::Rook, PieceKind::Bishop, PieceKind::Knight];

fn pawn_dir(color: Color) -> i8 {
    match color {
        Color::White => 1,
        Color::Black => -1,
    }
}

fn home_rank(color: Color) -> u8 {
    match color {
        Color::White => 0,
        Color::Black => 7,
    }
}

/// Whether `sq` is attacked by any piece of color `by`.
pub(super) fn is_attacked(p: &Position, sq: Square, by: Color) -> bool {
    let is = |s: Option<Square>, kinds: &[PieceKind]| {
        s.and_then(|s| p.piece_at(s)).is_some_and(|pc| pc.color == by && kinds.contains(&pc.kind))
    };
    // A pawn of `by` attacks sq from one rank behind (relative to its direction).
    let back = -pawn_dir(by);
    if is(sq.offset(-1, back), &[PieceKind::Pawn]) || is(sq.offset(1, back), &[PieceKind::Pawn]) {
        return true;
    }
    if KNIGHT_STEPS.iter().any(|&(f, r)| is(sq.offset(f, r), &[PieceKind::Knight])) {
        return true;
    }
    if KING_STEPS.iter().any(|&(f, r)| is(sq.offset(f, r), &[PieceKind::King])) {
        return true;
    }
    let slider = |dirs: &[(i8, i8)], kinds: &[PieceKind]| {
        dirs.iter().any(|&(df, dr)| {
            let mut cur = sq;
            while let Some(next) = cur.offset(df, dr) {
                if let Some(pc) = p.piece_at(next) {
                    return pc.color == by && kinds.contains(&pc.kind);
                }
                cur = next;
            }
            false
        })
    };
    slider(&ROOK_DIRS, &[PieceKind::Rook, PieceKind::Queen])
        || slider(&BISHOP_DIRS, &[PieceKind::Bishop, PieceKind::Queen])
}

fn king_square(p: &Position, color: Color) -> Option<Square> {
    Square::all().find(|&s| p.piece_at(s) == Some(Piece::new(color, PieceKind::King)))
}

pub(super) fn in_check(p: &Position, color: Color) -> bool {
    king_square(p, color).is_some_and(|k| is_attacked(p, k, color.opposite()))
}

fn push_move(out: &mut Vec<Move>, from: Square, to: Square, capture: bool) {
    out.push(Move { from, to, promotion: None, capture, kind: MoveKind::Normal });
}

fn pseudo_legal(p: &Position) -> Vec<Move> {
    let us = p.side_to_move;
    let mut out = Vec::with_capacity(48);
    for from in Square::all() {
        let Some(pc) = p.piece_at(from) else { continue };
        if pc.color != us {
            continue;
        }
        match pc.kind {
            PieceKind::Pawn => pawn_moves(p, from, us, &mut out),
            PieceKind::Knight => step_moves(p, from, us, &KNIGHT_STEPS, &mut out),
            PieceKind::King => {
                step_moves(p, from, us, &KING_STEPS, &mut out);
                castle_moves(p, from, us, &mut out);
            }
            PieceKind::Bishop => slide_moves(p, from, us, &BISHOP_DIRS, &mut out),
            PieceKind::Rook => slide_moves(p, from, us, &ROOK_DIRS, &mut out),
            PieceKind::Queen => {
                slide_moves(p, from, us, &ROOK_DIRS, &mut out);
                slide_moves(p, from, us, &BISHOP_DIRS, &mut out);
            }
        }
    }
    out
}

fn step_moves(p: &Position, from: Square, us: Color, steps: &[(i8, i8)], out: &mut Vec<Move>) {
    for &(df, dr) in steps {
        if let Some(to) = from.offset(df, dr) {
            match p.piece_at(to) {
                None => push_move(out, from, to, false),
                Some(pc) if pc.color != us => push_move(out, from, to, true),
                _ => {}
            }
        }
    }
}

fn slide_moves(p: &Position, from: Square, us: Color, dirs: &[(i8, i8)], out: &mut Vec<Move>) {
    for &(df, dr) in dirs {
        let mut cur = from;
        while let Some(to) = cur.offset(df, dr) {
            match p.piece_at(to) {
                None => push_move(out, from, to, false),
                Some(pc) => {
                    if pc.color != us {
                        push_move(out, from, to, true);
                    }
                    break;
                }
            }
            cur = to;
        }
    }
}

fn pawn_moves(p: &Position, from: Square, us: Color, out: &mut Vec<Move>) {
    let dir = pawn_dir(us);
    let last_rank = home_rank(us.opposite());
    let start_rank = match us {
        Color::White => 1,
        Color::Black => 6,
    };
    let mut add = |to: Square, capture: bool, kind: MoveKind| {
        if to.rank() == last_rank {
            for promo in PROMOTIONS {
                out.push(Move { from, to, promotion: Some(promo), capture, kind });
            }
        } else {
            out.push(Move { from, to, promotion: None, capture, kind });
        }
    };
    if let Some(one) = from.offset(0, dir) {
        if p.piece_at(one).is_none() {
            add(one, false, MoveKind::Normal);
            if from.rank() == start_rank {
                if let Some(two) = one.offset(0, dir) {
                    if p.piece_at(two).is_none() {
                        add(two, false, MoveKind::Normal);
                    }
                }
            }
        }
    }
    for df in [-1, 1] {
        let Some(to) = from.offset(df, dir) else { continue };
        match p.piece_at(to) {
            Some(pc) if pc.color != us => add(to, true, MoveKind::Normal),
            None if p.en_passant == Some(to) => {
                // The captured pawn sits beside us; a stale ep square without it is ignored.
                let victim = Square::new(to.file(), from.rank());
                if p.piece_at(victim) == Some(Piece::new(us.opposite(), PieceKind::Pawn)) {
                    add(to, true, MoveKind::EnPassant);
                }
            }
            _ => {}
        }
    }
}

fn castle_moves(p: &Position, from: Square, us: Color, out: &mut Vec<Move>) {
    let rank = home_rank(us);
    if from != Square::new(4, rank) || is_attacked(p, from, us.opposite()) {
        return;
    }
    let rook = Some(Piece::new(us, PieceKind::Rook));
    let empty = |files: &[u8]| files.iter().all(|&f| p.piece_at(Square::new(f, rank)).is_none());
    let safe = |files: &[u8]| files.iter().all(|&f| !is_attacked(p, Square::new(f, rank), us.opposite()));

    if p.castling.contains(CastlingRights::kingside(us))
        && p.piece_at(Square::new(7, rank)) == rook
        && empty(&[5, 6])
        && safe(&[5, 6])
    {
        out.push(Move {
            from,
            to: Square::new(6, rank),
            promotion: None,
            capture: false,
            kind: MoveKind::CastleKingside,
        });
    }
    if p.castling.contains(CastlingRights::queenside(us))
        && p.piece_at(Square::new(0, rank)) == rook
        && empty(&[1, 2, 3])
        && safe(&[2, 3])
    {
        out.push(Move {
            from,
            to: Square::new(2, rank),
            promotion: None,
            capture: false,
            kind: MoveKind::CastleQueenside,
        });
    }
}

pub(super) fn legal_moves(p: &Position) -> Vec<Move> {
    let us = p.side_to_move;
    pseudo_legal(p).into_iter().filter(|m| !in_check(&make_move(p, m), us)).collect()
}

fn corner_right(sq: Square) -> CastlingRights {
    match (sq.file(), sq.rank()) {
        (0, 0) => CastlingRights::WHITE_QUEENSIDE,
        (7, 0) => CastlingRights::WHITE_KINGSIDE,
        (0, 7) => CastlingRights::BLACK_QUEENSIDE,
        (7, 7) => CastlingRights::BLACK_KINGSIDE,
        _ => CastlingRights::NONE,
    }
}

/// Applies a move generated by `pseudo_legal` without checking legality.
pub(super) fn make_move(p: &Position, m: &Move) -> Position {
    let mut next = p.clone();
    let us = p.side_to_move;
    let moving = p.piece_at(m.from).expect("move starts on an occupied square");
    next.board[m.from.index()] = None;
    next.board[m.to.index()] = Some(match m.promotion {
        Some(kind) => Piece::new(us, kind),
        None => moving,
    });
    match m.kind {
        MoveKind::EnPassant => {
            next.board[Square::new(m.to.file(), m.from.rank()).index()] = None;
        }
        MoveKind::CastleKingside | MoveKind::CastleQueenside => {
            let rank = m.from.rank();
            let (rook_from, rook_to) = if m.kind == MoveKind::CastleKingside { (7, 5) } else { (0, 3) };
            next.board[Square::new(rook_from, rank).index()] = None;
            next.board[Square::new(rook_to, rank).index()] = Some(Piece::new(us, PieceKind::Rook));
        }
        MoveKind::Normal => {}
    }

    if moving.kind == PieceKind::King {
        next.castling.remove(CastlingRights::kingside(us));
        next.castling.remove(CastlingRights::queenside(us));
    }
    next.castling.remove(corner_right(m.from));
    next.castling.remove(corner_right(m.to));

    next.en_passant = None;
    if moving.kind == PieceKind::Pawn && m.from.rank().abs_diff(m.to.rank()) == 2 {
        next.en_passant = Some(Square::new(m.from.file(), (m.from.rank() + m.to.rank()) / 2));
    }
    next.halfmove_clock = if moving.kind == PieceKind::Pawn || m.capture { 0 } else { p.halfmove_clock + 1 };
    if us == Color::Black {
        next.fullmove_number += 1;
    }
    next.side_to_move = us.opposite();
    next
}

/// Number of leaf nodes of the legal move tree at `depth`.
pub fn perft(p: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = legal_moves(p);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves.iter().map(|m| perft(&make_move(p, m), depth - 1)).sum()
}
