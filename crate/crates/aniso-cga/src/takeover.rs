//! Selection-only takeover experiments.
//!
//! A single best individual is planted on an otherwise null-fitness grid
//! and selection runs with no variation operators. `N(t)`, the number of
//! best copies per generation, yields the growth curve, the growth rate
//! `delta(t)` and the takeover time (first generation with `N(t)` equal to
//! the population size). The module also carries the constant-speed model
//! `2*l*p` for rectangular grids, the stable-window extractor used to
//! measure the empirical constant phase, and the bisection search for the
//! anisotropy degree matching a target takeover time.

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{CellCoord, GridShape, TorusGrid};
use crate::rng::RunStream;
use crate::selection::{
    anisotropic_tournament, replace, AnisotropyParams, NeighborDistribution, TournamentConfig,
};
use crate::stats::{linear_fit, RegressionFit, Summary};

#[derive(Debug, Error, PartialEq)]
pub enum TakeoverError {
    #[error("no replicate reached takeover within the generation budget")]
    NoReplicateReached,
    #[error("no results to aggregate")]
    EmptyAggregate,
    #[error("target takeover {target:.1} is below the isotropic mean {baseline:.1}")]
    TargetBelowBaseline { target: f64, baseline: f64 },
    #[error("could not bracket target takeover {target:.1}; mean at alpha={alpha:.4} is {mean:.1}")]
    BracketNotFound { target: f64, alpha: f64, mean: f64 },
    #[error(transparent)]
    Fit(#[from] crate::stats::FitError),
}

/// Configuration for one takeover experiment.
#[derive(Clone, Debug)]
pub struct TakeoverConfig {
    pub shape: GridShape,
    pub params: AnisotropyParams,
    pub tournament: TournamentConfig,
    pub max_generations: u32,
    pub replicates: u32,
    pub base_seed: u64,
    /// Initial best-copy cell; the grid center when `None`.
    pub seed_cell: Option<CellCoord>,
}

impl TakeoverConfig {
    pub fn new(shape: GridShape, params: AnisotropyParams) -> Self {
        let tournament = TournamentConfig::binary();
        Self {
            shape,
            params,
            tournament,
            max_generations: default_max_generations(shape, tournament),
            replicates: 1,
            base_seed: 0,
            seed_cell: None,
        }
    }
}

/// Ten constant-phase horizons, floored at 5000 generations, so even the
/// narrowest grids finish with margin.
pub fn default_max_generations(shape: GridShape, tournament: TournamentConfig) -> u32 {
    let p = single_best_pick_probability(tournament);
    let rate = plateau_rate(shape.shortest_side(), p);
    let horizon = (10.0 * shape.population() as f64 / rate).ceil() as u32;
    horizon.max(5000)
}

/// Number of best copies per generation, starting at `N(0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthCurve {
    n_of_t: Vec<u32>,
}

impl GrowthCurve {
    pub fn new(n_of_t: Vec<u32>) -> Self {
        assert!(!n_of_t.is_empty());
        Self { n_of_t }
    }

    pub fn n_of_t(&self) -> &[u32] {
        &self.n_of_t
    }

    pub fn n_at(&self, t: usize) -> u32 {
        self.n_of_t[t]
    }

    /// Last recorded generation index.
    pub fn last_generation(&self) -> usize {
        self.n_of_t.len() - 1
    }

    pub fn terminal_n(&self) -> u32 {
        *self.n_of_t.last().unwrap()
    }

    /// `delta(t) = N(t) - N(t-1)` for `t >= 1`.
    pub fn deltas(&self) -> Vec<i64> {
        self.n_of_t.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TakeoverOutcome {
    Reached(u32),
    NotReached,
}

impl TakeoverOutcome {
    pub fn generation(&self) -> Option<u32> {
        match self {
            TakeoverOutcome::Reached(g) => Some(*g),
            TakeoverOutcome::NotReached => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TakeoverResult {
    pub curve: GrowthCurve,
    pub outcome: TakeoverOutcome,
    pub replicate: u32,
}

/// Fitness 1 at `seed_cell` (wrapped), 0 everywhere else.
pub fn init_takeover_grid(shape: GridShape, seed_cell: CellCoord) -> TorusGrid<u8> {
    let seed = shape.wrap(seed_cell.x as i64, seed_cell.y as i64);
    let mut grid = TorusGrid::filled(shape, 0u8);
    grid.set(seed, 1);
    grid
}

fn count_best(grid: &TorusGrid<u8>) -> u32 {
    grid.cells().iter().map(|&v| v as u32).sum()
}

/// Runs one replicate: tournament selection plus the replacement rule,
/// nothing else, until takeover or the generation budget runs out.
pub fn run_replicate(cfg: &TakeoverConfig, replicate: u32) -> TakeoverResult {
    run_replicate_with_snapshots(cfg, replicate, &[]).0
}

/// Same as [`run_replicate`] but also captures grid snapshots at the given
/// generations (generation 0 is the initial grid).
pub fn run_replicate_with_snapshots(
    cfg: &TakeoverConfig,
    replicate: u32,
    snapshot_times: &[u32],
) -> (TakeoverResult, Vec<(u32, TorusGrid<u8>)>) {
    let dist = NeighborDistribution::new(cfg.params);
    let stream = RunStream::new(cfg.base_seed, replicate as u64);
    let seed_cell = cfg.seed_cell.unwrap_or_else(|| cfg.shape.center());
    let mut grid = init_takeover_grid(cfg.shape, seed_cell);
    let mut scratch = grid.clone();
    let pop = cfg.shape.population() as u32;
    let tournament = cfg.tournament;

    let mut snapshots = Vec::new();
    if snapshot_times.contains(&0) {
        snapshots.push((0, grid.clone()));
    }

    let mut counts = vec![count_best(&grid)];
    let mut outcome =
        if counts[0] == pop { TakeoverOutcome::Reached(0) } else { TakeoverOutcome::NotReached };

    if outcome == TakeoverOutcome::NotReached {
        for gen in 1..=cfg.max_generations {
            grid.synchronous_step_into(&mut scratch, &stream, gen as u64, |snap, c, rng| {
                let won = anisotropic_tournament(snap, c, &dist, tournament, |v: &u8| *v, rng);
                *replace(snap.get(c), snap.get(won), |v: &u8| *v, rng)
            });
            std::mem::swap(&mut grid, &mut scratch);
            let n = count_best(&grid);
            counts.push(n);
            if snapshot_times.contains(&gen) {
                snapshots.push((gen, grid.clone()));
            }
            if n == pop {
                outcome = TakeoverOutcome::Reached(gen);
                break;
            }
        }
    }

    (TakeoverResult { curve: GrowthCurve::new(counts), outcome, replicate }, snapshots)
}

/// Runs all configured replicates, in parallel, with per-replicate streams.
pub fn run_all(cfg: &TakeoverConfig) -> Vec<TakeoverResult> {
    (0..cfg.replicates).into_par_iter().map(|r| run_replicate(cfg, r)).collect()
}

/// Replicate-aggregated view of a takeover experiment.
#[derive(Clone, Debug)]
pub struct Aggregate {
    /// Element-wise mean of `N(t)`, curves padded by holding terminal `N`.
    pub mean_curve: Vec<f64>,
    /// Takeover-generation statistics over replicates that reached takeover.
    pub takeover: Summary,
    pub reached: usize,
    pub replicates: usize,
}

pub fn aggregate(results: &[TakeoverResult]) -> Result<Aggregate, TakeoverError> {
    if results.is_empty() {
        return Err(TakeoverError::EmptyAggregate);
    }
    let gens: Vec<f64> = results
        .iter()
        .filter_map(|r| r.outcome.generation().map(f64::from))
        .collect();
    let takeover = Summary::of(&gens).ok_or(TakeoverError::NoReplicateReached)?;

    let longest = results.iter().map(|r| r.curve.n_of_t().len()).max().unwrap();
    let mut mean_curve = vec![0.0; longest];
    for r in results {
        let n = r.curve.n_of_t();
        let terminal = r.curve.terminal_n() as f64;
        for (t, slot) in mean_curve.iter_mut().enumerate() {
            *slot += n.get(t).map_or(terminal, |&v| v as f64);
        }
    }
    for slot in &mut mean_curve {
        *slot /= results.len() as f64;
    }
    Ok(Aggregate { mean_curve, takeover, reached: gens.len(), replicates: results.len() })
}

/// Predicted constant growth rate `2*l*p` on a rectangular grid with
/// shortest side `l`, where `p` is the probability of selecting the best
/// individual when the neighborhood holds exactly one copy of it.
pub fn plateau_rate(shortest_side: u32, p: f64) -> f64 {
    2.0 * shortest_side as f64 * p
}

/// Probability that a uniform (isotropic) tournament picks the unique best
/// individual when exactly one of the five neighborhood slots holds it.
///
/// Independent draws: `1 - (4/5)^k`; distinct draws: `k/5`.
pub fn single_best_pick_probability(cfg: TournamentConfig) -> f64 {
    let k = cfg.k() as f64;
    if cfg.with_replacement() {
        1.0 - (4.0f64 / 5.0).powf(k)
    } else {
        k / 5.0
    }
}

/// A window of the growth-rate sequence whose values all stay within a
/// relative tolerance of the window mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableWindow {
    pub start: usize,
    /// exclusive
    pub end: usize,
    pub mean: f64,
}

impl StableWindow {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Longest window of `deltas` with at least `min_len` entries where every
/// value lies within `tolerance * mean` of the window mean. Earliest wins
/// among equally long windows.
pub fn stable_delta_window(
    deltas: &[f64],
    min_len: usize,
    tolerance: f64,
) -> Option<StableWindow> {
    let n = deltas.len();
    if n < min_len || min_len == 0 {
        return None;
    }
    let mut prefix = vec![0.0; n + 1];
    for (i, &d) in deltas.iter().enumerate() {
        prefix[i + 1] = prefix[i] + d;
    }
    let mut best: Option<StableWindow> = None;
    for start in 0..=n - min_len {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for end in start + 1..=n {
            let d = deltas[end - 1];
            lo = lo.min(d);
            hi = hi.max(d);
            let len = end - start;
            if len < min_len {
                continue;
            }
            let mean = (prefix[end] - prefix[start]) / len as f64;
            if mean <= 0.0 {
                continue;
            }
            let band = tolerance * mean;
            if hi - mean <= band && mean - lo <= band {
                let better = match best {
                    None => true,
                    Some(b) => len > b.len(),
                };
                if better {
                    best = Some(StableWindow { start, end, mean });
                }
            }
        }
    }
    best
}

/// OLS fit of the anisotropy degree against the `l/L` side ratio over
/// `(ratio, alpha)` pairs.
pub fn fit_alpha_ratio_regression(pairs: &[(f64, f64)]) -> Result<RegressionFit, TakeoverError> {
    Ok(linear_fit(pairs)?)
}

/// Bisection search settings for [`equivalent_alpha`].
#[derive(Clone, Debug)]
pub struct EquivalenceConfig {
    pub shape: GridShape,
    pub tournament: TournamentConfig,
    /// Replicates per probe.
    pub replicates: u32,
    /// Accept a probe whose mean is this close to the target even when the
    /// confidence interval has not yet closed on it.
    pub tolerance: f64,
    pub max_iterations: u32,
    pub max_generations: u32,
    /// Initial upper bracket; grown toward 1 if it does not cover the target.
    pub alpha_hi: f64,
    pub base_seed: u64,
}

impl EquivalenceConfig {
    pub fn new(shape: GridShape, base_seed: u64) -> Self {
        let tournament = TournamentConfig::binary();
        Self {
            shape,
            tournament,
            replicates: 100,
            tolerance: 1.0,
            max_iterations: 20,
            max_generations: default_max_generations(shape, tournament),
            alpha_hi: 0.99,
            base_seed,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EquivalenceResult {
    pub alpha: f64,
    pub mean_takeover: f64,
    pub probes: u32,
}

fn probe_mean(alpha: f64, cfg: &EquivalenceConfig) -> Result<Summary, TakeoverError> {
    let params = AnisotropyParams::new(alpha).expect("bisection stays inside [0, 1)");
    let run = TakeoverConfig {
        shape: cfg.shape,
        params,
        tournament: cfg.tournament,
        max_generations: cfg.max_generations,
        replicates: cfg.replicates,
        // common random numbers across probes keep the empirical
        // mean-vs-alpha map monotone for the bisection
        base_seed: cfg.base_seed,
        seed_cell: None,
    };
    aggregate(&run_all(&run)).map(|a| a.takeover)
}

/// Finds the anisotropy degree whose mean takeover time matches `target`
/// by bisection over `alpha`, relying on the mean takeover time growing
/// monotonically with `alpha`.
///
/// A probe is accepted when its 95% confidence interval contains the
/// target or its mean is within `tolerance`; after `max_iterations` the
/// midpoint of the final bracket is returned.
pub fn equivalent_alpha(
    target: f64,
    cfg: &EquivalenceConfig,
) -> Result<EquivalenceResult, TakeoverError> {
    let mut probes = 0u32;
    let mut run_probe = |alpha: f64| -> Result<Summary, TakeoverError> {
        probes += 1;
        probe_mean(alpha, cfg)
    };

    let mut lo = 0.0f64;
    let baseline = run_probe(lo)?;
    if target < baseline.mean - baseline.ci95_half_width() - cfg.tolerance {
        return Err(TakeoverError::TargetBelowBaseline { target, baseline: baseline.mean });
    }
    if (baseline.mean - target).abs() <= cfg.tolerance {
        return Ok(EquivalenceResult { alpha: lo, mean_takeover: baseline.mean, probes });
    }

    let mut hi = cfg.alpha_hi;
    let mut hi_mean = run_probe(hi)?;
    while hi_mean.mean < target {
        if hi >= 0.999 {
            return Err(TakeoverError::BracketNotFound { target, alpha: hi, mean: hi_mean.mean });
        }
        hi = 1.0 - (1.0 - hi) / 2.0;
        hi_mean = run_probe(hi)?;
    }

    let mut mid = 0.5 * (lo + hi);
    let mut mid_summary = run_probe(mid)?;
    for _ in 0..cfg.max_iterations {
        let close = (mid_summary.mean - target).abs() <= cfg.tolerance
            || (mid_summary.mean - target).abs() <= mid_summary.ci95_half_width();
        if close {
            break;
        }
        if mid_summary.mean < target {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        mid_summary = run_probe(mid)?;
    }
    Ok(EquivalenceResult { alpha: mid, mean_takeover: mid_summary.mean, probes })
}
