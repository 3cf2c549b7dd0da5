//! UCI client behaviour against the in-process scripted mock engine.

use std::time::Duration;

use squareval::board::{Color, Position};
use squareval::engine::mock::{spawn_in_process, Handshake, MockScript};
use squareval::engine::{
    evaluate_batch, EngineError, EngineLimits, EngineSession, ScoreKind, SessionConfig, UciScore, MATE_CAP,
};

const FIG1: &str = "8/8/8/5N2/8/8/8/8 w - - 0 1";

fn quick() -> SessionConfig {
    SessionConfig {
        handshake_timeout: Duration::from_millis(300),
        depth_timeout: Duration::from_millis(300),
        grace: Duration::from_millis(100),
    }
}

fn session(script: MockScript, options: &[(String, String)]) -> Result<EngineSession, EngineError> {
    let (input, output, _handle) = spawn_in_process(script).unwrap();
    EngineSession::from_streams(input, output, options, quick())
}

fn cp(n: i32) -> MockScript {
    MockScript::with_score(UciScore::Cp(n))
}

#[test]
fn handshake_transcript_order() {
    let options = vec![("Hash".to_string(), "32".to_string()), ("Threads".to_string(), "1".to_string())];
    let s = session(cp(0), &options).unwrap();
    assert_eq!(s.transcript(), ["uci", "setoption name Hash value 32", "setoption name Threads value 1", "isready"]);
    assert_eq!(s.engine_name(), Some("squareval-mock"));
}

#[test]
fn silent_engine_times_out() {
    let script = MockScript { handshake: Handshake::Silent, ..cp(0) };
    assert!(matches!(session(script, &[]), Err(EngineError::Timeout { .. })));
}

#[test]
fn exiting_engine_is_eof() {
    let script = MockScript { handshake: Handshake::Exit, ..cp(0) };
    let err = session(script, &[]).unwrap_err();
    assert!(matches!(err, EngineError::Eof { .. } | EngineError::Io(_)), "{err}");
}

#[test]
fn evaluation_sign_and_units() {
    let white = Position::from_fen(FIG1).unwrap();
    let black = white.with_side_to_move(Color::Black);
    let mut s = session(cp(35), &[]).unwrap();
    let e = s.evaluate(&white, EngineLimits::Depth(12)).unwrap();
    assert_eq!((e.pawns_white, e.kind, e.depth_reached), (0.35, ScoreKind::Centipawn, 12));
    let e = s.evaluate(&black, EngineLimits::Depth(12)).unwrap();
    assert_eq!(e.pawns_white, -0.35);
    assert_eq!(
        &s.transcript()[2..],
        [
            format!("position fen {FIG1}"),
            "go depth 12".to_string(),
            "position fen 8/8/8/5N2/8/8/8/8 b - - 0 1".to_string(),
            "go depth 12".to_string(),
        ]
    );
}

#[test]
fn mate_scores_are_capped() {
    let mut s = session(MockScript::with_score(UciScore::Mate(3)), &[]).unwrap();
    let e = s.evaluate(&Position::startpos(), EngineLimits::Depth(4)).unwrap();
    assert_eq!((e.pawns_white, e.kind, e.mate_in), (MATE_CAP, ScoreKind::MateCapped, Some(3)));
}

#[test]
fn deepest_score_wins() {
    let script = MockScript {
        extra_info: vec![
            "info depth 20 score cp 99".into(),
            "info depth 20 score cp 98".into(),
            "info string x".into(),
        ],
        ..cp(10)
    };
    let mut s = session(script, &[]).unwrap();
    let e = s.evaluate(&Position::startpos(), EngineLimits::Depth(5)).unwrap();
    assert_eq!((e.pawns_white, e.depth_reached, e.raw_cp), (0.98, 20, Some(98)));
}

#[test]
fn movetime_search() {
    let mut s = session(cp(-40), &[]).unwrap();
    let e = s.evaluate(&Position::startpos(), EngineLimits::movetime(10).unwrap()).unwrap();
    assert_eq!(e.pawns_white, -0.4);
    assert_eq!(s.transcript().last().unwrap(), "go movetime 10");
}

#[test]
fn missing_score_is_protocol_error() {
    let mut s = session(MockScript { no_score: true, ..cp(0) }, &[]).unwrap();
    let err = s.evaluate(&Position::startpos(), EngineLimits::Depth(3)).unwrap_err();
    assert!(matches!(err, EngineError::Protocol(_)));
}

#[test]
fn hung_search_times_out_and_session_is_retired() {
    let mut s = session(MockScript { hang: true, ..cp(0) }, &[]).unwrap();
    let err = s.evaluate(&Position::startpos(), EngineLimits::Depth(3)).unwrap_err();
    assert!(matches!(err, EngineError::Timeout { .. }));
    assert_eq!(s.transcript().last().unwrap(), "stop");
    assert!(matches!(s.evaluate(&Position::startpos(), EngineLimits::Depth(3)), Err(EngineError::SessionDead)));
}

#[test]
fn engine_death_mid_search_is_eof() {
    let mut s = session(MockScript { die_after: Some(0), ..cp(0) }, &[]).unwrap();
    let err = s.evaluate(&Position::startpos(), EngineLimits::Depth(3)).unwrap_err();
    assert!(matches!(err, EngineError::Eof { .. } | EngineError::Io(_)), "{err}");
}

#[test]
fn same_transcript_same_evaluation() {
    let pos = Position::from_fen("r1bqkbnr/pppp1ppp/2n5/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 2 3").unwrap();
    let a = session(cp(27), &[]).unwrap().evaluate(&pos, EngineLimits::Depth(9)).unwrap();
    let b = session(cp(27), &[]).unwrap().evaluate(&pos, EngineLimits::Depth(9)).unwrap();
    assert_eq!(a, b);
}

fn positions(n: usize) -> Vec<Position> {
    let mut out = vec![Position::startpos()];
    while out.len() < n {
        let last = out.last().unwrap().clone();
        let m = last.legal_moves()[out.len() % 3];
        out.push(last.apply_move(&m).unwrap());
    }
    out
}

#[test]
fn batch_preserves_order() {
    let mut pool = vec![session(cp(20), &[]).unwrap(), session(cp(20), &[]).unwrap()];
    let input = positions(4);
    let out = evaluate_batch(&mut pool, &input, EngineLimits::Depth(2)).unwrap();
    assert_eq!(out.len(), 4);
    for (i, (pos, eval)) in out.iter().enumerate() {
        assert_eq!(pos, &input[i]);
        assert_eq!(eval.pawns_white, 0.2 * pos.side_to_move().sign());
    }
}

#[test]
fn batch_survives_a_dying_session() {
    let dying = session(MockScript { die_after: Some(1), ..cp(20) }, &[]).unwrap();
    let mut pool = vec![dying, session(cp(20), &[]).unwrap()];
    let out = evaluate_batch(&mut pool, &positions(4), EngineLimits::Depth(2)).unwrap();
    assert_eq!(out.len(), 4);
    assert_eq!(pool.len(), 1, "dead session retired");
}

#[test]
fn batch_fails_when_every_session_dies() {
    let mut pool = vec![session(MockScript { die_after: Some(1), ..cp(20) }, &[]).unwrap()];
    let err = evaluate_batch(&mut pool, &positions(4), EngineLimits::Depth(2)).unwrap_err();
    assert!(matches!(err, EngineError::AllSessionsFailed { sessions: 1, .. }));
    assert!(pool.is_empty());
}

#[test]
fn empty_batch_and_empty_pool() {
    let mut pool = vec![session(cp(0), &[]).unwrap()];
    assert!(evaluate_batch(&mut pool, &[], EngineLimits::Depth(2)).unwrap().is_empty());
    let mut empty = Vec::new();
    assert!(matches!(evaluate_batch(&mut empty, &positions(1), EngineLimits::Depth(2)), Err(EngineError::EmptyPool)));
}

#[test]
fn launch_failure() {
    let err = EngineSession::start("/nonexistent/engine-binary", &[], quick()).unwrap_err();
    assert!(matches!(err, EngineError::Launch { .. }));
}
