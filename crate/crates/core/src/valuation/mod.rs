//! Reading values back out: pawns ↔ win probability, per-(color, piece)
//! 8×8 grids from data or from a model, per-square histograms, rankings.

mod render;

use thiserror::Error;

use crate::board::{Color, PieceKind, PieceState, Square};
use crate::dataset::{encode, LabeledExample};
use crate::model::{ModelError, ModelParams};

pub use render::{parse_heatmap_csv, render_heatmap, render_histogram, RenderFormat};

/// Default histogram bin width in pawns.
pub const DEFAULT_BIN_WIDTH: f64 = 0.25;
/// Histograms cover [-HISTOGRAM_RANGE, HISTOGRAM_RANGE] pawns.
pub const HISTOGRAM_RANGE: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValuationError {
    #[error("win probability must lie strictly between 0 and 1, got {0}")]
    Domain(f64),
    #[error("bin width must be positive and finite, got {0}")]
    BinWidth(f64),
    #[error("k must be at least 1")]
    ZeroK,
}

/// Win probability for an advantage of `pawns`: 1 / (1 + 10^(-pawns/4)).
pub fn cp_to_winprob(pawns: f64) -> f64 {
    // Evaluated on the non-negative side so that f(-c) = 1 - f(c) holds exactly.
    let p = 1.0 / (1.0 + 10f64.powf(-pawns.abs() / 4.0));
    if pawns < 0.0 {
        1.0 - p
    } else {
        p
    }
}

/// Inverse of [`cp_to_winprob`]: 4·log10(w / (1 - w)).
pub fn winprob_to_cp(w: f64) -> Result<f64, ValuationError> {
    if !(w > 0.0 && w < 1.0) {
        return Err(ValuationError::Domain(w));
    }
    Ok(4.0 * (w / (1.0 - w)).log10())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GridSource {
    Empirical,
    Model,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GridScale {
    Pawns,
    WinProbability,
}

impl GridScale {
    /// Neutral value the diverging palette is centred on.
    pub fn center(self) -> f64 {
        match self {
            GridScale::Pawns => 0.0,
            GridScale::WinProbability => 0.5,
        }
    }
}

/// An 8×8 map indexed by square index (a1 = 0, h8 = 63).
#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapGrid {
    pub color: Color,
    pub piece: PieceKind,
    /// `None` marks an absent cell (no data).
    pub values: [Option<f64>; 64],
    pub counts: [u32; 64],
    pub source: GridSource,
    pub scale: GridScale,
    /// Examples behind the grid: matching rows for empirical grids, training
    /// rows (if known) for model grids.
    pub examples: usize,
    /// Hex digest of the model file the grid was computed from.
    pub model_hash: Option<String>,
}

impl HeatmapGrid {
    pub fn value(&self, square: Square) -> Option<f64> {
        self.values[square.index()]
    }

    pub fn count(&self, square: Square) -> u32 {
        self.counts[square.index()]
    }

    pub fn present(&self) -> impl Iterator<Item = (Square, f64)> + '_ {
        Square::all().filter_map(|sq| self.value(sq).map(|v| (sq, v)))
    }

    /// Unweighted mean over present cells. Informational only: it is not a
    /// piece value in any normalised sense.
    pub fn mean_over_squares(&self) -> Option<f64> {
        let (sum, n) = self.present().fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
        (n > 0).then(|| sum / n as f64)
    }
}

/// Mean target per square over examples in the (color, piece) slice.
pub fn empirical_heatmap(examples: &[LabeledExample], color: Color, piece: PieceKind) -> HeatmapGrid {
    let mut sums = [0.0f64; 64];
    let mut counts = [0u32; 64];
    for e in examples.iter().filter(|e| e.state.color == color && e.state.piece == piece) {
        let i = e.state.square.index();
        sums[i] += e.target_pawns;
        counts[i] += 1;
    }
    let values = std::array::from_fn(|i| (counts[i] > 0).then(|| sums[i] / f64::from(counts[i])));
    HeatmapGrid {
        color,
        piece,
        values,
        counts,
        source: GridSource::Empirical,
        scale: GridScale::Pawns,
        examples: counts.iter().map(|&c| c as usize).sum(),
        model_hash: None,
    }
}

/// The model's prediction for the piece on each of the 64 squares.
pub fn model_heatmap(params: &ModelParams, color: Color, piece: PieceKind) -> Result<HeatmapGrid, ModelError> {
    let mut values = [None; 64];
    for square in Square::all() {
        let state = PieceState { color, piece, square };
        values[square.index()] = Some(params.forward(&encode(&state))?);
    }
    Ok(HeatmapGrid {
        color,
        piece,
        values,
        counts: [1; 64],
        source: GridSource::Model,
        scale: GridScale::Pawns,
        examples: 0,
        model_hash: None,
    })
}

/// Maps every present cell of a pawn grid through [`cp_to_winprob`].
pub fn winprob_grid(grid: &HeatmapGrid) -> HeatmapGrid {
    assert_eq!(grid.scale, GridScale::Pawns, "grid is already in win probabilities");
    HeatmapGrid { values: grid.values.map(|v| v.map(cp_to_winprob)), scale: GridScale::WinProbability, ..grid.clone() }
}

/// Present cells by descending value, ties in square order, at most `k`.
pub fn top_squares(grid: &HeatmapGrid, k: usize) -> Result<Vec<(Square, f64)>, ValuationError> {
    if k == 0 {
        return Err(ValuationError::ZeroK);
    }
    let mut cells: Vec<(Square, f64)> = grid.present().collect();
    cells.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    cells.truncate(k);
    Ok(cells)
}

/// The best square in each file that has data, files a to h.
pub fn best_per_file(grid: &HeatmapGrid) -> Vec<(Square, f64)> {
    (0..8u8)
        .filter_map(|file| {
            (0..8u8)
                .filter_map(|rank| {
                    let sq = Square::new(file, rank);
                    grid.value(sq).map(|v| (sq, v))
                })
                // Strictly greater keeps the lower rank on ties.
                .fold(None, |best: Option<(Square, f64)>, cell| match best {
                    Some(b) if b.1 >= cell.1 => Some(b),
                    _ => Some(cell),
                })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub state: PieceState,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n: u64,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }
}

/// Counts the targets of examples in `state` in bins of `bin_width` starting
/// at -10. Values beyond the range land in the outermost bins.
pub fn square_histogram(
    examples: &[LabeledExample],
    state: PieceState,
    bin_width: f64,
) -> Result<Histogram, ValuationError> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(ValuationError::BinWidth(bin_width));
    }
    let span = 2.0 * HISTOGRAM_RANGE;
    let bins = ((span / bin_width) - 1e-9).ceil().max(1.0) as usize;
    let bin_edges: Vec<f64> = (0..=bins).map(|k| -HISTOGRAM_RANGE + k as f64 * bin_width).collect();
    let mut counts = vec![0u64; bins];
    let mut n = 0;
    for e in examples.iter().filter(|e| e.state == state) {
        let raw = ((e.target_pawns + HISTOGRAM_RANGE) / bin_width).floor();
        let idx = if raw.is_nan() { 0 } else { raw.clamp(0.0, (bins - 1) as f64) as usize };
        counts[idx] += 1;
        n += 1;
    }
    Ok(Histogram { state, bin_edges, counts, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ex(color: Color, piece: PieceKind, sq: &str, target: f64) -> LabeledExample {
        LabeledExample {
            state: PieceState { color, piece, square: sq.parse().unwrap() },
            target_pawns: target,
            game_id: 0,
            ply: 0,
        }
    }

    #[test]
    fn conversion_values() {
        assert_eq!(cp_to_winprob(0.0), 0.5);
        let w = cp_to_winprob(0.2);
        assert!((w - 0.52874).abs() < 1e-4, "{w}");
        assert!((w - 0.526).abs() <= 0.003);
        assert!((cp_to_winprob(10.0) - 0.99685).abs() < 1e-4);
        assert_eq!(winprob_to_cp(0.5).unwrap(), 0.0);
        assert!((winprob_to_cp(0.9).unwrap() - 4.0 * 9f64.log10()).abs() < 1e-12);
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(winprob_to_cp(bad).is_err());
        }
    }

    proptest! {
        #[test]
        fn conversion_is_a_symmetric_bijection(c in -10.0f64..10.0, d in -10.0f64..10.0) {
            let w = cp_to_winprob(c);
            prop_assert!(w > 0.0 && w < 1.0);
            prop_assert!((winprob_to_cp(w).unwrap() - c).abs() < 1e-9);
            prop_assert_eq!(cp_to_winprob(-c), 1.0 - w);
            if c < d {
                prop_assert!(cp_to_winprob(c) < cp_to_winprob(d));
            }
        }

        #[test]
        fn empirical_grid_reproduces_global_mean(targets in prop::collection::vec((0usize..64, -10.0f64..10.0), 1..60)) {
            let examples: Vec<LabeledExample> = targets
                .iter()
                .map(|&(sq, t)| LabeledExample {
                    state: PieceState { color: Color::White, piece: PieceKind::Bishop, square: Square::from_index(sq) },
                    target_pawns: t, game_id: 0, ply: 0,
                })
                .collect();
            let grid = empirical_heatmap(&examples, Color::White, PieceKind::Bishop);
            let weighted: f64 = grid.present().map(|(sq, v)| v * f64::from(grid.count(sq))).sum();
            let total: u32 = grid.counts.iter().sum();
            let mean = targets.iter().map(|t| t.1).sum::<f64>() / targets.len() as f64;
            prop_assert_eq!(total as usize, examples.len());
            prop_assert!((weighted / f64::from(total) - mean).abs() < 1e-9);

            let w = winprob_grid(&grid);
            let order = |g: &HeatmapGrid| top_squares(g, 64).unwrap().into_iter().map(|c| c.0).collect::<Vec<_>>();
            prop_assert_eq!(order(&grid), order(&w));
        }
    }

    #[test]
    fn empirical_mean_and_absence() {
        let examples = vec![
            ex(Color::White, PieceKind::Knight, "f5", 0.5),
            ex(Color::White, PieceKind::Knight, "f5", 0.7),
            ex(Color::Black, PieceKind::Knight, "f5", -3.0),
            ex(Color::White, PieceKind::Bishop, "f5", 9.0),
        ];
        let g = empirical_heatmap(&examples, Color::White, PieceKind::Knight);
        let f5: Square = "f5".parse().unwrap();
        assert!((g.value(f5).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(g.count(f5), 2);
        assert_eq!(g.values.iter().filter(|v| v.is_none()).count(), 63);
        assert_eq!(g.examples, 2);
        let empty = empirical_heatmap(&examples, Color::Black, PieceKind::Queen);
        assert!(empty.values.iter().all(Option::is_none));
        assert_eq!(empty.mean_over_squares(), None);
    }

    #[test]
    fn model_grid_matches_forward() {
        let mut params = ModelParams::zeros();
        params.set_output_bias(0.25);
        let g = model_heatmap(&params, Color::Black, PieceKind::Rook).unwrap();
        assert!(g.values.iter().all(|v| *v == Some(0.25)));
        assert_eq!(g.mean_over_squares(), Some(0.25));

        let params = ModelParams::init(5);
        let g = model_heatmap(&params, Color::White, PieceKind::Knight).unwrap();
        for sq in Square::all() {
            let direct = params
                .forward(&encode(&PieceState { color: Color::White, piece: PieceKind::Knight, square: sq }))
                .unwrap();
            assert_eq!(g.value(sq), Some(direct));
        }
        assert!(g.counts.iter().all(|&c| c == 1));
    }

    #[test]
    fn winprob_grid_cells() {
        let examples = vec![ex(Color::White, PieceKind::Pawn, "e4", 0.0), ex(Color::White, PieceKind::Pawn, "d4", 0.2)];
        let g = winprob_grid(&empirical_heatmap(&examples, Color::White, PieceKind::Pawn));
        assert_eq!(g.value("e4".parse().unwrap()), Some(0.5));
        assert!((g.value("d4".parse().unwrap()).unwrap() - 0.526).abs() <= 0.003);
        assert_eq!(g.value("a1".parse().unwrap()), None);
        assert_eq!(g.count("d4".parse().unwrap()), 1);
        assert_eq!(g.scale, GridScale::WinProbability);
    }

    #[test]
    fn rankings() {
        let examples = vec![
            ex(Color::White, PieceKind::Knight, "f5", 0.9),
            ex(Color::White, PieceKind::Knight, "c3", 0.4),
            ex(Color::White, PieceKind::Knight, "e4", 0.4),
            ex(Color::White, PieceKind::Knight, "f3", 0.95),
            ex(Color::White, PieceKind::Knight, "a1", -1.0),
        ];
        let g = empirical_heatmap(&examples, Color::White, PieceKind::Knight);
        let sq = |s: &str| s.parse::<Square>().unwrap();
        let top = top_squares(&g, 3).unwrap();
        assert_eq!(top, vec![(sq("f3"), 0.95), (sq("f5"), 0.9), (sq("c3"), 0.4)]);
        assert_eq!(top_squares(&g, 100).unwrap().len(), 5);
        assert_eq!(top_squares(&g, 0), Err(ValuationError::ZeroK));
        let files = best_per_file(&g);
        assert_eq!(files, vec![(sq("a1"), -1.0), (sq("c3"), 0.4), (sq("e4"), 0.4), (sq("f3"), 0.95)]);

        let mut params = ModelParams::zeros();
        params.set_output_bias(0.1);
        let flat = model_heatmap(&params, Color::White, PieceKind::Knight).unwrap();
        let files = best_per_file(&flat);
        assert_eq!(files.len(), 8);
        assert!(files.iter().all(|(s, _)| s.rank() == 0));
        assert_eq!(top_squares(&flat, 2).unwrap()[0].0, sq("a1"));
    }

    #[test]
    fn histogram_counts() {
        let n = |t| ex(Color::White, PieceKind::Knight, "f5", t);
        let examples = vec![n(0.1), n(0.1), n(0.3), ex(Color::White, PieceKind::Knight, "f6", 0.1)];
        let state = examples[0].state;
        let h = square_histogram(&examples, state, 0.2).unwrap();
        assert_eq!(h.counts.len(), 100);
        assert_eq!(h.bin_edges.len(), 101);
        let nonzero: Vec<(usize, u64)> = h.counts.iter().copied().enumerate().filter(|c| c.1 > 0).collect();
        assert_eq!(nonzero, vec![(50, 2), (51, 1)]);
        assert_eq!(h.n, 3);

        let h = square_histogram(&[n(10.0), n(-10.0), n(-12.0)], state, DEFAULT_BIN_WIDTH).unwrap();
        assert_eq!(h.counts.len(), 80);
        assert_eq!((h.counts[0], h.counts[79]), (2, 1));
        assert!(h.bin_edges.windows(2).all(|w| w[0] < w[1]));

        let other = PieceState { square: "a1".parse().unwrap(), ..state };
        let h = square_histogram(&examples, other, 0.25).unwrap();
        assert_eq!(h.n, 0);
        assert!(h.counts.iter().all(|&c| c == 0));
        assert!(square_histogram(&examples, state, 0.0).is_err());
    }
}
