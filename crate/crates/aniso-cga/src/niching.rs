//! Two-lineage niching experiment.
//!
//! Two equally fit best individuals are planted far apart along the least
//! favored axis and selection runs alone. With isotropic selection the two
//! lineages mix by drift; with strong vertical anisotropy each lineage owns
//! a band of columns and two stable frontiers appear between them. The
//! mixing index quantifies inter-lineage contact.

use rayon::prelude::*;

use crate::grid::{CellCoord, Direction, GridShape, TorusGrid};
use crate::rng::RunStream;
use crate::selection::{
    anisotropic_tournament, replace, AnisotropyParams, NeighborDistribution, TournamentConfig,
};

/// State of one grid cell in the two-lineage experiment.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LineageCell {
    /// Null fitness.
    Empty,
    LineageA,
    LineageB,
}

impl LineageCell {
    /// Both lineages carry the best fitness (1); empty cells are null.
    #[inline]
    pub fn fitness(self) -> u8 {
        match self {
            LineageCell::Empty => 0,
            LineageCell::LineageA | LineageCell::LineageB => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NichingConfig {
    pub shape: GridShape,
    pub params: AnisotropyParams,
    pub tournament: TournamentConfig,
    pub generations: u32,
    /// Generations at which to keep a full grid snapshot.
    pub snapshot_times: Vec<u32>,
    /// Record counts/mixing every this many generations (0 = only the
    /// initial and final states). Snapshot times are always recorded.
    pub record_every: u32,
    pub base_seed: u64,
}

impl NichingConfig {
    pub fn new(shape: GridShape, params: AnisotropyParams, generations: u32) -> Self {
        Self {
            shape,
            params,
            tournament: TournamentConfig::binary(),
            generations,
            snapshot_times: Vec::new(),
            record_every: 1,
            base_seed: 0,
        }
    }
}

/// Per-generation census of the two lineages.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineageCounts {
    pub generation: u32,
    pub count_a: u32,
    pub count_b: u32,
    pub count_empty: u32,
    pub mixing_index: f64,
}

#[derive(Clone, Debug)]
pub struct NichingReport {
    /// Recorded rows in generation order; always includes generation 0 and
    /// the final generation.
    pub rows: Vec<LineageCounts>,
    pub snapshots: Vec<(u32, TorusGrid<LineageCell>)>,
    pub replicate: u32,
}

impl NichingReport {
    pub fn final_counts(&self) -> &LineageCounts {
        self.rows.last().expect("report always carries the final census")
    }
}

/// Both best copies on the same row (for `alpha >= 0`, where East-West is
/// the least favored axis), at maximal toroidal separation: x = width/4 and
/// x = 3*width/4. For `alpha < 0` the seeds are stacked vertically instead.
pub fn init_two_best(shape: GridShape, params: AnisotropyParams) -> TorusGrid<LineageCell> {
    let horizontal = params.alpha() >= 0.0;
    let (a, b) = if horizontal {
        assert!(shape.width() >= 2, "two horizontally separated seeds need width >= 2");
        let y = shape.height() / 2;
        (
            CellCoord { x: shape.width() / 4, y },
            CellCoord { x: 3 * shape.width() / 4, y },
        )
    } else {
        assert!(shape.height() >= 2, "two vertically separated seeds need height >= 2");
        let x = shape.width() / 2;
        (
            CellCoord { x, y: shape.height() / 4 },
            CellCoord { x, y: 3 * shape.height() / 4 },
        )
    };
    debug_assert_ne!(a, b);
    let mut grid = TorusGrid::filled(shape, LineageCell::Empty);
    grid.set(a, LineageCell::LineageA);
    grid.set(b, LineageCell::LineageB);
    grid
}

fn census(grid: &TorusGrid<LineageCell>, generation: u32) -> LineageCounts {
    let mut a = 0;
    let mut b = 0;
    for &c in grid.cells() {
        match c {
            LineageCell::LineageA => a += 1,
            LineageCell::LineageB => b += 1,
            LineageCell::Empty => {}
        }
    }
    LineageCounts {
        generation,
        count_a: a,
        count_b: b,
        count_empty: grid.shape().population() as u32 - a - b,
        mixing_index: mixing_index(grid),
    }
}

/// Fraction of occupied cells whose four axis neighbors include at least
/// one cell of the opposite lineage. 0 when at most one lineage is present,
/// 1 on a perfect checkerboard; an all-empty grid yields 0.
pub fn mixing_index(grid: &TorusGrid<LineageCell>) -> f64 {
    let shape = grid.shape();
    let mut occupied = 0u32;
    let mut touching = 0u32;
    for coord in grid.coords() {
        let mine = *grid.get(coord);
        if mine == LineageCell::Empty {
            continue;
        }
        occupied += 1;
        let other = match mine {
            LineageCell::LineageA => LineageCell::LineageB,
            LineageCell::LineageB => LineageCell::LineageA,
            LineageCell::Empty => unreachable!(),
        };
        let hood = shape.von_neumann(coord);
        let contact = [Direction::North, Direction::South, Direction::East, Direction::West]
            .iter()
            .any(|&d| *grid.get(hood.get(d)) == other);
        if contact {
            touching += 1;
        }
    }
    if occupied == 0 {
        0.0
    } else {
        touching as f64 / occupied as f64
    }
}

/// Runs one replicate of the two-lineage experiment: the same
/// selection-plus-replacement rule as the takeover runs, with the fair
/// replacement coin arbitrating between equally fit lineages.
pub fn run_replicate(cfg: &NichingConfig, replicate: u32) -> NichingReport {
    let dist = NeighborDistribution::new(cfg.params);
    let stream = RunStream::new(cfg.base_seed, replicate as u64);
    let tournament = cfg.tournament;
    let mut grid = init_two_best(cfg.shape, cfg.params);
    let mut scratch = grid.clone();

    let record_at = |gen: u32| {
        gen == 0
            || gen == cfg.generations
            || (cfg.record_every > 0 && gen % cfg.record_every == 0)
            || cfg.snapshot_times.contains(&gen)
    };

    let mut rows = vec![census(&grid, 0)];
    let mut snapshots = Vec::new();
    if cfg.snapshot_times.contains(&0) {
        snapshots.push((0, grid.clone()));
    }

    for gen in 1..=cfg.generations {
        grid.synchronous_step_into(&mut scratch, &stream, gen as u64, |snap, c, rng| {
            let won =
                anisotropic_tournament(snap, c, &dist, tournament, |v: &LineageCell| v.fitness(), rng);
            *replace(snap.get(c), snap.get(won), |v: &LineageCell| v.fitness(), rng)
        });
        std::mem::swap(&mut grid, &mut scratch);
        if record_at(gen) {
            rows.push(census(&grid, gen));
        }
        if cfg.snapshot_times.contains(&gen) {
            snapshots.push((gen, grid.clone()));
        }
    }

    NichingReport { rows, snapshots, replicate }
}

/// Final census of many replicates, in replicate order.
pub fn run_finals(cfg: &NichingConfig, replicates: u32) -> Vec<LineageCounts> {
    let mut quiet = cfg.clone();
    quiet.record_every = 0;
    quiet.snapshot_times.clear();
    (0..replicates)
        .into_par_iter()
        .map(|r| *run_replicate(&quiet, r).final_counts())
        .collect()
}
