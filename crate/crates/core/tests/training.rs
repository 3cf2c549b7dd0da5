//! Training against a known target table: the model should recover it.

use squareval::board::{Color, PieceState};
use squareval::dataset::{split, LabeledExample};
use squareval::model::{train, TrainConfig};
use squareval::rng::SplitMix64;

/// Centre-loving table: +1 pawn in the centre down to -1 in the corners,
/// mirrored in sign for Black.
fn target(state: &PieceState) -> f64 {
    let d = (f64::from(state.square.file()) - 3.5).abs() + (f64::from(state.square.rank()) - 3.5).abs();
    let v = (4.0 - d) / 3.0;
    if state.color == Color::White {
        v
    } else {
        -v
    }
}

#[test]
fn recovers_a_square_table_from_5k_examples() {
    let states: Vec<PieceState> = PieceState::all().collect();
    let mut rng = SplitMix64::new(2024);
    let examples: Vec<LabeledExample> = (0..5_000)
        .map(|i| {
            let state = states[rng.below(states.len())];
            LabeledExample { state, target_pawns: target(&state), game_id: i / 25, ply: (i % 25) as u32 }
        })
        .collect();
    let data = split(&examples, 0.8, 1).unwrap();
    let (params, history) = train(&data, &TrainConfig { seed: 1, ..Default::default() }).unwrap();
    let val = history.last().unwrap().val_mse.unwrap();
    assert!(val < 0.01, "validation MSE {val}");
    let bound = params.output_bound();
    assert!(states.iter().all(|s| params.forward(&squareval::dataset::encode(s)).unwrap().abs() <= bound));
}
