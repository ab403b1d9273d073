//! Anisotropic selection over the fuzzy Von Neumann neighborhood.
//!
//! The neighborhood keeps its shape; what changes with the anisotropy
//! degree `alpha` is the probability of picking each direction. At
//! `alpha = 0` every one of the five cells is drawn with probability 1/5
//! (the plain Von Neumann tournament); at `alpha = 1` the East and West
//! neighbors are never drawn and selection happens in a vertical
//! three-cell neighborhood.

use rand::{Rng, RngExt};
use thiserror::Error;

use crate::grid::{CellCoord, Direction, TorusGrid};

/// Center-cell pick probability shared by all experiments.
pub const DEFAULT_CENTER_PROB: f64 = 0.2;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("anisotropy degree must lie in [-1, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("center probability must lie in [0, 1], got {0}")]
    CenterOutOfRange(f64),
    #[error("tournament size must lie in [1, 5], got {0}")]
    TournamentSize(u8),
}

/// Anisotropy degree `alpha` plus the center pick probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnisotropyParams {
    alpha: f64,
    p_center: f64,
}

impl AnisotropyParams {
    /// Params with the standard center probability of 1/5.
    pub fn new(alpha: f64) -> Result<Self, ParamError> {
        Self::with_center_prob(alpha, DEFAULT_CENTER_PROB)
    }

    pub fn with_center_prob(alpha: f64, p_center: f64) -> Result<Self, ParamError> {
        if !(-1.0..=1.0).contains(&alpha) || alpha.is_nan() {
            return Err(ParamError::AlphaOutOfRange(alpha));
        }
        if !(0.0..=1.0).contains(&p_center) || p_center.is_nan() {
            return Err(ParamError::CenterOutOfRange(p_center));
        }
        Ok(Self { alpha, p_center })
    }

    /// `alpha = 0`: direction plays no role.
    pub fn isotropic() -> Self {
        Self { alpha: 0.0, p_center: DEFAULT_CENTER_PROB }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p_center(&self) -> f64 {
        self.p_center
    }
}

/// Direction pick probabilities induced by [`AnisotropyParams`].
///
/// `p_ns` and `p_ew` are the probabilities of the North/South and East/West
/// *pairs*; each single direction is drawn with half the pair probability,
/// so the five per-direction probabilities sum to one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeighborDistribution {
    p_center: f64,
    p_ns: f64,
    p_ew: f64,
}

impl NeighborDistribution {
    /// `p_ns = (1 - p_c)/2 * (1 + alpha)`, `p_ew = (1 - p_c)/2 * (1 - alpha)`.
    pub fn new(params: AnisotropyParams) -> Self {
        let half = (1.0 - params.p_center) / 2.0;
        Self {
            p_center: params.p_center,
            p_ns: half * (1.0 + params.alpha),
            p_ew: half * (1.0 - params.alpha),
        }
    }

    pub fn p_center(&self) -> f64 {
        self.p_center
    }

    /// Total probability of drawing North or South.
    pub fn p_ns_pair(&self) -> f64 {
        self.p_ns
    }

    /// Total probability of drawing East or West.
    pub fn p_ew_pair(&self) -> f64 {
        self.p_ew
    }

    /// Probability of one specific direction.
    pub fn probability(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Center => self.p_center,
            Direction::North | Direction::South => self.p_ns / 2.0,
            Direction::East | Direction::West => self.p_ew / 2.0,
        }
    }

    /// Draws one direction.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Direction {
        let u: f64 = rng.random();
        let half_ns = self.p_ns / 2.0;
        let half_ew = self.p_ew / 2.0;
        let mut acc = self.p_center;
        if u < acc {
            return Direction::Center;
        }
        acc += half_ns;
        if u < acc {
            return Direction::North;
        }
        acc += half_ns;
        if u < acc {
            return Direction::South;
        }
        acc += half_ew;
        if u < acc {
            return Direction::East;
        }
        Direction::West
    }

    /// Draws a direction outside `taken` (bitmask by direction index) by
    /// rejection, which realizes the distribution renormalized over the
    /// remaining directions. Returns `None` if no remaining direction has
    /// positive probability.
    fn sample_excluding<R: Rng + ?Sized>(&self, taken: u8, rng: &mut R) -> Option<Direction> {
        let open_mass: f64 = Direction::ALL
            .iter()
            .filter(|d| taken & (1 << d.index()) == 0)
            .map(|&d| self.probability(d))
            .sum();
        if open_mass <= 0.0 {
            return None;
        }
        loop {
            let d = self.sample(rng);
            if taken & (1 << d.index()) == 0 {
                return Some(d);
            }
        }
    }
}

/// Tournament arity and draw mode.
///
/// Draws are independent (with replacement) unless configured otherwise;
/// the without-replacement mode draws `k` distinct directions by successive
/// renormalized sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TournamentConfig {
    k: u8,
    with_replacement: bool,
}

impl TournamentConfig {
    pub fn new(k: u8) -> Result<Self, ParamError> {
        if !(1..=5).contains(&k) {
            return Err(ParamError::TournamentSize(k));
        }
        Ok(Self { k, with_replacement: true })
    }

    pub fn without_replacement(k: u8) -> Result<Self, ParamError> {
        Ok(Self { with_replacement: false, ..Self::new(k)? })
    }

    /// Binary tournament, independent draws.
    pub fn binary() -> Self {
        Self { k: 2, with_replacement: true }
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn with_replacement(&self) -> bool {
        self.with_replacement
    }
}

/// Draws the tournament's candidate directions into `out`, returning how
/// many were drawn (fewer than `k` only in the without-replacement mode on
/// a distribution with fewer than `k` reachable directions).
pub fn draw_candidates<R: Rng + ?Sized>(
    dist: &NeighborDistribution,
    cfg: TournamentConfig,
    rng: &mut R,
    out: &mut [Direction; 5],
) -> usize {
    let k = cfg.k as usize;
    if cfg.with_replacement {
        for slot in out.iter_mut().take(k) {
            *slot = dist.sample(rng);
        }
        return k;
    }
    let mut taken = 0u8;
    for (drawn, slot) in out.iter_mut().take(k).enumerate() {
        match dist.sample_excluding(taken, rng) {
            Some(d) => {
                taken |= 1 << d.index();
                *slot = d;
            }
            None => return drawn,
        }
    }
    k
}

/// Anisotropic tournament: draws `k` directions from the fuzzy
/// neighborhood of `cell`, resolves them on the snapshot, and returns the
/// coordinate of a fittest candidate. Ties between equally fit candidates
/// are broken uniformly at random among the drawn slots.
///
/// `key` maps an individual to its fitness; a greater key means fitter.
pub fn anisotropic_tournament<V, K, O, R>(
    snapshot: &TorusGrid<V>,
    cell: CellCoord,
    dist: &NeighborDistribution,
    cfg: TournamentConfig,
    key: K,
    rng: &mut R,
) -> CellCoord
where
    K: Fn(&V) -> O,
    O: PartialOrd,
    R: Rng + ?Sized,
{
    let hood = snapshot.shape().von_neumann(cell);
    let mut dirs = [Direction::Center; 5];
    let drawn = draw_candidates(dist, cfg, rng, &mut dirs);
    debug_assert!(drawn >= 1);

    let mut winner = hood.get(dirs[0]);
    let mut best = key(snapshot.get(winner));
    let mut ties = 1u32;
    for &dir in dirs.iter().take(drawn).skip(1) {
        let coord = hood.get(dir);
        let k = key(snapshot.get(coord));
        if k > best {
            winner = coord;
            best = k;
            ties = 1;
        } else if k == best {
            // reservoir rule keeps each tied slot equally likely
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                winner = coord;
            }
        }
    }
    winner
}

/// Replacement rule: the winner takes the cell if strictly fitter, wins a
/// fair coin against an equally fit incumbent, and is rejected otherwise.
pub fn replace<'a, V, K, O, R>(current: &'a V, winner: &'a V, key: K, rng: &mut R) -> &'a V
where
    K: Fn(&V) -> O,
    O: PartialOrd,
    R: Rng + ?Sized,
{
    use std::cmp::Ordering;
    match key(winner).partial_cmp(&key(current)) {
        Some(Ordering::Greater) => winner,
        Some(Ordering::Equal) => {
            if rng.random_bool(0.5) {
                winner
            } else {
                current
            }
        }
        _ => current,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridShape;
    use crate::rng::RunStream;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dist(alpha: f64) -> NeighborDistribution {
        NeighborDistribution::new(AnisotropyParams::new(alpha).unwrap())
    }

    #[test]
    fn isotropic_distribution_is_uniform() {
        let d = dist(0.0);
        assert_abs_diff_eq!(d.p_ns_pair(), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(d.p_ew_pair(), 0.4, epsilon = 1e-15);
        for dir in Direction::ALL {
            assert_abs_diff_eq!(d.probability(dir), 0.2, epsilon = 1e-15);
        }
    }

    #[test]
    fn vertical_limit() {
        let d = dist(1.0);
        assert_abs_diff_eq!(d.p_ns_pair(), 0.8, epsilon = 1e-15);
        assert_eq!(d.p_ew_pair(), 0.0);
    }

    #[test]
    fn half_anisotropy_splits_pairs() {
        let d = dist(0.5);
        // NS pair totals 0.6, so 0.3 per direction; EW pair 0.2, 0.1 each
        assert_abs_diff_eq!(d.probability(Direction::North), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(d.probability(Direction::South), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(d.probability(Direction::East), 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(d.probability(Direction::West), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(AnisotropyParams::new(1.01).is_err());
        assert!(AnisotropyParams::new(-1.01).is_err());
        assert!(AnisotropyParams::new(f64::NAN).is_err());
        assert!(AnisotropyParams::with_center_prob(0.0, -0.1).is_err());
        assert!(AnisotropyParams::with_center_prob(0.0, 1.1).is_err());
        assert!(TournamentConfig::new(0).is_err());
        assert!(TournamentConfig::new(6).is_err());
    }

    #[test]
    fn sampling_respects_support_at_the_limits() {
        let mut rng = RunStream::new(11, 0).rng(0, 0);
        let vertical = dist(1.0);
        let horizontal = dist(-1.0);
        for _ in 0..100_000 {
            let d = vertical.sample(&mut rng);
            assert!(!matches!(d, Direction::East | Direction::West), "alpha=1 drew {d:?}");
            let d = horizontal.sample(&mut rng);
            assert!(!matches!(d, Direction::North | Direction::South), "alpha=-1 drew {d:?}");
        }
    }

    #[test]
    fn isotropic_sampling_frequencies_within_3_sigma() {
        let mut rng = RunStream::new(12, 0).rng(0, 0);
        let d = dist(0.0);
        let n = 1_000_000u32;
        let mut counts = [0u32; 5];
        for _ in 0..n {
            counts[d.sample(&mut rng).index()] += 1;
        }
        let p = 0.2;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            let dev = (c as f64 - n as f64 * p).abs();
            assert!(dev < 3.0 * sigma, "direction {i}: count {c}, deviation {dev:.0} > 3 sigma");
        }
    }

    #[test]
    fn tournament_k1_returns_the_sampled_cell() {
        let shape = GridShape::new(3, 3).unwrap();
        let grid = TorusGrid::from_fn(shape, |c| (c.y * 3 + c.x) as i32);
        let cfg = TournamentConfig::new(1).unwrap();
        let d = dist(0.3);
        let stream = RunStream::new(5, 0);
        let center = CellCoord { x: 1, y: 1 };
        let hood = shape.von_neumann(center);
        for i in 0..200 {
            // replay the single direction draw on a twin stream
            let mut draw_rng = stream.rng(0, i);
            let mut dirs = [Direction::Center; 5];
            draw_candidates(&d, cfg, &mut draw_rng, &mut dirs);
            let mut rng = stream.rng(0, i);
            let won = anisotropic_tournament(&grid, center, &d, cfg, |v| *v, &mut rng);
            assert_eq!(won, hood.get(dirs[0]));
        }
    }

    #[test]
    fn tournament_on_identical_neighbors_returns_that_value() {
        let shape = GridShape::new(4, 4).unwrap();
        let grid = TorusGrid::filled(shape, 7i32);
        let mut rng = RunStream::new(6, 0).rng(0, 0);
        for _ in 0..100 {
            let won = anisotropic_tournament(
                &grid,
                CellCoord { x: 2, y: 2 },
                &dist(0.8),
                TournamentConfig::binary(),
                |v| *v,
                &mut rng,
            );
            assert_eq!(*grid.get(won), 7);
        }
    }

    #[test]
    fn binary_tournament_finds_single_best_at_the_enumerated_rate() {
        // one best cell to the North; uniform draws; two independent draws
        // hit it with probability 1 - (4/5)^2 = 9/25
        let expected = {
            let mut hits = 0;
            for a in 0..5 {
                for b in 0..5 {
                    if a == Direction::North.index() || b == Direction::North.index() {
                        hits += 1;
                    }
                }
            }
            hits as f64 / 25.0
        };
        assert_abs_diff_eq!(expected, 0.36, epsilon = 1e-15);

        let shape = GridShape::new(5, 5).unwrap();
        let center = CellCoord { x: 2, y: 2 };
        let mut grid = TorusGrid::filled(shape, 0u8);
        grid.set(CellCoord { x: 2, y: 1 }, 1); // North neighbor of center
        let d = dist(0.0);
        let stream = RunStream::new(21, 0);
        let trials = 200_000u32;
        let mut wins = 0u32;
        for i in 0..trials {
            let mut rng = stream.rng(1, i as u64);
            let won =
                anisotropic_tournament(&grid, center, &d, TournamentConfig::binary(), |v| *v, &mut rng);
            if *grid.get(won) == 1 {
                wins += 1;
            }
        }
        let freq = wins as f64 / trials as f64;
        let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
        assert!(
            (freq - expected).abs() < 4.0 * sigma,
            "win frequency {freq:.4} vs expected {expected:.4}"
        );
    }

    #[test]
    fn without_replacement_binary_rate_is_two_fifths() {
        // distinct draws: P(best among 2 of 5) = 2/5
        let shape = GridShape::new(5, 5).unwrap();
        let center = CellCoord { x: 2, y: 2 };
        let mut grid = TorusGrid::filled(shape, 0u8);
        grid.set(CellCoord { x: 3, y: 2 }, 1); // East neighbor
        let d = dist(0.0);
        let cfg = TournamentConfig::without_replacement(2).unwrap();
        let stream = RunStream::new(22, 0);
        let trials = 200_000u32;
        let mut wins = 0u32;
        for i in 0..trials {
            let mut rng = stream.rng(1, i as u64);
            if *grid.get(anisotropic_tournament(&grid, center, &d, cfg, |v| *v, &mut rng)) == 1 {
                wins += 1;
            }
        }
        let freq = wins as f64 / trials as f64;
        let sigma = (0.4f64 * 0.6 / trials as f64).sqrt();
        assert!((freq - 0.4).abs() < 4.0 * sigma, "win frequency {freq:.4} vs 0.4");
    }

    #[test]
    fn tournament_winner_matches_best_drawn_candidate() {
        // all-distinct fitness values; replay the draws on a twin stream and
        // check the winner carries the maximum drawn key
        let shape = GridShape::new(7, 5).unwrap();
        let grid = TorusGrid::from_fn(shape, |c| (c.y * 7 + c.x) as i32);
        let d = dist(0.4);
        let stream = RunStream::new(33, 0);
        for k in 1..=5u8 {
            let cfg = TournamentConfig::new(k).unwrap();
            for i in 0..400u64 {
                let cell = shape.coord_of((i % shape.population() as u64) as usize);
                let hood = shape.von_neumann(cell);
                let mut twin = stream.rng(k as u64, i);
                let mut dirs = [Direction::Center; 5];
                let drawn = draw_candidates(&d, cfg, &mut twin, &mut dirs);
                let best = dirs[..drawn].iter().map(|&dd| *grid.get(hood.get(dd))).max().unwrap();
                let mut rng = stream.rng(k as u64, i);
                let won = anisotropic_tournament(&grid, cell, &d, cfg, |v| *v, &mut rng);
                assert_eq!(*grid.get(won), best);
            }
        }
    }

    #[test]
    fn replace_prefers_strict_improvement() {
        let mut rng = RunStream::new(40, 0).rng(0, 0);
        assert_eq!(*replace(&0, &1, |v| *v, &mut rng), 1);
        assert_eq!(*replace(&1, &0, |v| *v, &mut rng), 1);
    }

    #[test]
    fn replace_flips_a_fair_coin_on_ties() {
        let stream = RunStream::new(41, 0);
        let trials = 100_000u32;
        let mut kept = 0u32;
        let current = 5i32;
        let winner = 5i32;
        for i in 0..trials {
            let mut rng = stream.rng(0, i as u64);
            if std::ptr::eq(replace(&current, &winner, |v| *v, &mut rng), &winner) {
                kept += 1;
            }
        }
        let freq = kept as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "winner kept in {freq:.4} of tied replacements");
    }

    proptest! {
        #[test]
        fn per_direction_probabilities_sum_to_one(alpha in -1.0f64..=1.0, pc in 0.0f64..=1.0) {
            let d = NeighborDistribution::new(
                AnisotropyParams::with_center_prob(alpha, pc).unwrap(),
            );
            let total: f64 = Direction::ALL.iter().map(|&dir| d.probability(dir)).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            for dir in Direction::ALL {
                prop_assert!(d.probability(dir) >= 0.0);
            }
        }

        #[test]
        fn negating_alpha_swaps_the_pairs(alpha in -1.0f64..=1.0) {
            let d = dist(alpha);
            let m = dist(-alpha);
            prop_assert!((d.p_ns_pair() - m.p_ew_pair()).abs() < 1e-15);
            prop_assert!((d.p_ew_pair() - m.p_ns_pair()).abs() < 1e-15);
        }

        #[test]
        fn ns_pair_grows_with_alpha(a in -1.0f64..1.0, b in -1.0f64..1.0) {
            prop_assume!(a < b);
            let da = dist(a);
            let db = dist(b);
            prop_assert!(da.p_ns_pair() < db.p_ns_pair());
            prop_assert!(da.p_ew_pair() > db.p_ew_pair());
        }
    }
}
