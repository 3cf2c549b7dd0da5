//! Move generation and replay checked against independent chess implementations:
//! a corpus replayed by python-chess (frozen fixture), published perft counts,
//! and random playouts driven by shakmaty.

use std::collections::BTreeMap;

use proptest::prelude::*;
use shakmaty::fen::Fen;
use shakmaty::san::San;
use shakmaty::{CastlingMode, Chess, EnPassantMode, Position as _};
use squareval::board::{perft, Position};
use squareval::pgn::parse_pgn_str;

const CORPUS: &str = include_str!("fixtures/replay_corpus.pgn");
const EXPECTED: &str = include_str!("fixtures/replay_expected.txt");

fn expected_fens() -> BTreeMap<usize, Vec<String>> {
    let mut out: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for line in EXPECTED.lines() {
        let mut parts = line.splitn(3, '\t');
        let game: usize = parts.next().unwrap().parse().unwrap();
        let ply: usize = parts.next().unwrap().parse().unwrap();
        let fens = out.entry(game).or_default();
        assert_eq!(fens.len(), ply);
        fens.push(parts.next().unwrap().to_string());
    }
    out
}

#[test]
fn corpus_replay_matches_reference_fens() {
    let expected = expected_fens();
    let games: Vec<_> = parse_pgn_str(CORPUS).map(|g| g.expect("fixture game parses")).collect();
    assert_eq!(games.len(), 100);
    let mut plies = 0;
    for (i, game) in games.iter().enumerate() {
        let replayed = game.replay().unwrap_or_else(|e| panic!("game {i}: {e}"));
        let want = &expected[&i];
        assert_eq!(replayed.len(), want.len(), "game {i} ply count");
        for ((ply, pos), fen) in replayed.iter().zip(want) {
            assert_eq!(&pos.to_fen(), fen, "game {i} ply {ply}");
            assert_eq!(Position::from_fen(fen).unwrap(), *pos, "game {i} ply {ply} round trip");
        }
        plies += replayed.len();
    }
    assert_eq!(plies, EXPECTED.lines().count());
}

#[test]
fn perft_matches_published_counts() {
    let start = Position::startpos();
    assert_eq!(perft(&start, 3), 8_902);
    assert_eq!(perft(&start, 4), 197_281);
}

#[test]
fn perft_tricky_positions() {
    // Published counts for the standard perft suite positions 2-5.
    let cases = [
        ("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1", 3, 97_862),
        ("8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1", 4, 43_238),
        ("r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1", 3, 9_467),
        ("rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8", 3, 62_379),
    ];
    for (fen, depth, nodes) in cases {
        assert_eq!(perft(&Position::from_fen(fen).unwrap(), depth), nodes, "{fen}");
    }
}

fn reference_fen(pos: &Chess) -> String {
    Fen::from_position(pos, EnPassantMode::Always).to_string()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_playouts_agree_with_shakmaty(choices in prop::collection::vec(any::<u32>(), 1..160)) {
        let mut reference = Chess::default();
        let mut ours = Position::startpos();
        for choice in choices {
            let legal = reference.legal_moves();
            prop_assert_eq!(ours.legal_moves().len(), legal.len(), "{}", reference_fen(&reference));
            if legal.is_empty() {
                break;
            }
            let m = &legal[choice as usize % legal.len()];
            let san = San::from_move(&reference, *m).to_string();
            let resolved = ours.resolve_san(&san).map_err(|e| TestCaseError::fail(e.to_string()))?;
            ours = ours.apply_move(&resolved).unwrap();
            reference = reference.play(*m).unwrap();
            prop_assert_eq!(ours.to_fen(), reference_fen(&reference));
        }
    }

    #[test]
    fn fen_round_trips_for_reachable_positions(choices in prop::collection::vec(any::<u32>(), 0..120)) {
        let mut pos = Position::startpos();
        for choice in choices {
            let moves = pos.legal_moves();
            if moves.is_empty() {
                break;
            }
            pos = pos.apply_move(&moves[choice as usize % moves.len()]).unwrap();
            let fen = pos.to_fen();
            prop_assert_eq!(Position::from_fen(&fen).unwrap(), pos.clone());
            let reparsed: Fen = fen.parse().unwrap();
            prop_assert!(reparsed.into_position::<Chess>(CastlingMode::Standard).is_ok());
            prop_assert_eq!(pos.piece_states().len(), pos.piece_count());
        }
    }
}
