//! Learn and report the marginal value of chess (color, piece, square) states.
//!
//! The pipeline: parse PGN games ([`pgn`]), replay them on the [`board`],
//! label every position with an external UCI [`engine`], turn the labels into
//! per-state training rows ([`dataset`]), fit the small tanh regression
//! network ([`model`]), and read the result back out as heatmaps and
//! histograms ([`valuation`]).

pub mod board;
pub mod dataset;
pub mod engine;
pub mod model;
pub mod pgn;
pub mod rng;
pub mod valuation;
