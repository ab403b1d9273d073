//! Cellular genetic algorithm with anisotropic selection on a toroidal grid.
//!
//! A cGA's population lives on a two-dimensional torus and mates inside
//! small overlapping neighborhoods. Anisotropic selection keeps the grid
//! square and the Von Neumann neighborhood intact but skews the probability
//! of picking each neighbor by direction: a degree `alpha` in [-1, 1]
//! moves mass between the North/South and East/West pairs, which tunes the
//! selective pressure continuously.
//!
//! The crate provides:
//!
//! - [`grid`]: the toroidal substrate with strictly synchronous stepping;
//! - [`selection`]: the fuzzy-neighborhood distribution, the anisotropic
//!   tournament and the replacement rule;
//! - [`takeover`]: selection-only growth/takeover experiments, the
//!   constant-speed plateau model and the takeover-equivalence search;
//! - [`niching`]: the two-lineage niche-formation experiment;
//! - [`qap`]: a full cGA on quadratic assignment instances;
//! - [`rng`]: per-(replicate, generation, cell) random streams making every
//!   experiment reproducible independent of thread count;
//! - [`output`]: CSV and PGM writers for the experiment artifacts.

pub mod grid;
pub mod niching;
pub mod output;
pub mod qap;
pub mod rng;
pub mod selection;
pub mod stats;
pub mod takeover;

pub use grid::{CellCoord, Direction, GridShape, TorusGrid};
pub use selection::{AnisotropyParams, NeighborDistribution, TournamentConfig};
