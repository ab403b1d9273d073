//! Quadratic assignment: instance handling, permutation operators and the
//! cellular GA optimization loop.
//!
//! Costs are minimized: `cost(p) = sum_ij d[p(i)][p(j)] * f[i][j]` where
//! `p(i)` is the location assigned to facility `i`, `d` the location
//! distance matrix and `f` the facility flow matrix. Instances load from
//! whitespace-separated text holding `n`, the flow matrix, then the
//! distance matrix.

use std::path::Path;

use rand::distr::Distribution;
use rand::{Rng, RngExt};
use rand_distr::Poisson;
use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{GridShape, TorusGrid};
use crate::rng::RunStream;
use crate::selection::{
    anisotropic_tournament, replace, AnisotropyParams, NeighborDistribution, TournamentConfig,
};
use crate::stats::Summary;

#[derive(Debug, Error)]
pub enum QapError {
    #[error("missing problem size")]
    MissingSize,
    #[error("problem size must be positive, got `{0}`")]
    BadSize(String),
    #[error("token {position} (`{token}`) is not a number")]
    NonNumeric { position: usize, token: String },
    #[error("expected {expected} tokens for n={n}, found {found}")]
    WrongTokenCount { n: usize, expected: usize, found: usize },
    #[error("matrix entry {position} is negative ({value})")]
    NegativeEntry { position: usize, value: f64 },
    #[error("mapping is not a permutation of 0..{n}")]
    NotAPermutation { n: usize },
    #[error("solution file is malformed: {0}")]
    BadSolutionFile(String),
    #[error("certificate permutation evaluates to {got}, expected {expected}")]
    CertificateMismatch { got: f64, expected: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A QAP instance: `n` facilities, `n` locations, flow and distance
/// matrices (row-major, non-negative entries).
#[derive(Clone, Debug, PartialEq)]
pub struct QapInstance {
    n: usize,
    flow: Vec<f64>,
    distance: Vec<f64>,
    name: String,
}

impl QapInstance {
    pub fn new(
        n: usize,
        flow: Vec<f64>,
        distance: Vec<f64>,
        name: impl Into<String>,
    ) -> Result<Self, QapError> {
        if n == 0 {
            return Err(QapError::BadSize("0".into()));
        }
        let expected = 1 + 2 * n * n;
        let found = 1 + flow.len() + distance.len();
        if flow.len() != n * n || distance.len() != n * n {
            return Err(QapError::WrongTokenCount { n, expected, found });
        }
        for (position, &value) in flow.iter().chain(distance.iter()).enumerate() {
            if value < 0.0 || value.is_nan() {
                return Err(QapError::NegativeEntry { position: position + 1, value });
            }
        }
        Ok(Self { n, flow, distance, name: name.into() })
    }

    /// Parses the flow-first text format: `n`, then `n*n` flow entries,
    /// then `n*n` distance entries, all whitespace separated.
    pub fn parse(text: &str, name: impl Into<String>) -> Result<Self, QapError> {
        let mut tokens = text.split_whitespace();
        let size_token = tokens.next().ok_or(QapError::MissingSize)?;
        let n: usize = match size_token.parse::<i64>() {
            Ok(v) if v > 0 => v as usize,
            Ok(_) => return Err(QapError::BadSize(size_token.into())),
            Err(_) => return Err(QapError::BadSize(size_token.into())),
        };
        let expected = 1 + 2 * n * n;
        let rest: Vec<&str> = tokens.collect();
        if rest.len() + 1 != expected {
            return Err(QapError::WrongTokenCount { n, expected, found: rest.len() + 1 });
        }
        let mut values = Vec::with_capacity(2 * n * n);
        for (i, tok) in rest.iter().enumerate() {
            let v: f64 = tok
                .parse()
                .map_err(|_| QapError::NonNumeric { position: i + 2, token: (*tok).into() })?;
            values.push(v);
        }
        let distance = values.split_off(n * n);
        Self::new(n, values, distance, name)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, QapError> {
        let path = path.as_ref();
        let name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        Self::parse(&std::fs::read_to_string(path)?, name)
    }

    /// Swaps the roles of the flow and distance matrices.
    pub fn swap_matrices(&mut self) {
        std::mem::swap(&mut self.flow, &mut self.distance);
    }

    /// Checks that `certificate` evaluates to `expected_cost`; if it does
    /// not, retries with the two matrices swapped (distance-first files).
    /// On success the instance is returned with roles oriented so that the
    /// certificate holds; otherwise the mismatched cost is reported.
    pub fn with_verified_roles(
        mut self,
        certificate: &Permutation,
        expected_cost: f64,
    ) -> Result<Self, QapError> {
        let got = objective(&self, certificate);
        if got == expected_cost {
            return Ok(self);
        }
        self.swap_matrices();
        let swapped = objective(&self, certificate);
        if swapped == expected_cost {
            return Ok(self);
        }
        self.swap_matrices();
        Err(QapError::CertificateMismatch { got, expected: expected_cost })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn distance(&self, k: usize, l: usize) -> f64 {
        self.distance[k * self.n + l]
    }

    #[inline]
    pub fn flow(&self, i: usize, j: usize) -> f64 {
        self.flow[i * self.n + j]
    }
}

/// Facility-to-location assignment: `p[i]` is the location of facility `i`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Permutation(Vec<u16>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n as u16).collect())
    }

    /// Validates that `mapping` is a bijection on `0..n`.
    pub fn new(mapping: Vec<usize>) -> Result<Self, QapError> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &v in &mapping {
            if v >= n || seen[v] {
                return Err(QapError::NotAPermutation { n });
            }
            seen[v] = true;
        }
        Ok(Self(mapping.into_iter().map(|v| v as u16).collect()))
    }

    /// Uniform random permutation (Fisher-Yates).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut p: Vec<u16> = (0..n as u16).collect();
        p.shuffle(rng);
        Self(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn swap(&mut self, i: usize, j: usize) {
        self.0.swap(i, j);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&v| v as usize)
    }

    /// Position-of-value table: `inv[p[i]] = i`.
    fn inverse_table(&self) -> Vec<u16> {
        let mut inv = vec![0u16; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v as usize] = i as u16;
        }
        inv
    }

    pub fn is_valid(&self) -> bool {
        let mut seen = vec![false; self.0.len()];
        self.0.iter().all(|&v| {
            let v = v as usize;
            v < seen.len() && !std::mem::replace(&mut seen[v], true)
        })
    }
}

/// `sum_ij d[p(i)][p(j)] * f[i][j]`, minimized.
pub fn objective(instance: &QapInstance, p: &Permutation) -> f64 {
    let n = instance.n;
    assert_eq!(p.len(), n, "permutation length {} does not match instance size {n}", p.len());
    let mut total = 0.0;
    for i in 0..n {
        let pi = p.get(i);
        let d_row = &instance.distance[pi * n..(pi + 1) * n];
        let f_row = &instance.flow[i * n..(i + 1) * n];
        for j in 0..n {
            total += d_row[p.get(j)] * f_row[j];
        }
    }
    total
}

/// Repeated uniform position-exchange crossover.
///
/// Each round draws a position `i`, finds `j` with `c2[j] = c1[i]` and `k`
/// with `c1[k] = c2[i]`, then swaps positions `i, j` in the first working
/// copy and `i, k` in the second. Both children stay valid permutations by
/// construction.
pub fn upmx_crossover<R: Rng + ?Sized>(
    p1: &Permutation,
    p2: &Permutation,
    repeats: usize,
    rng: &mut R,
) -> (Permutation, Permutation) {
    let n = p1.len();
    assert_eq!(n, p2.len(), "parents must have equal length");
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    let mut inv1 = c1.inverse_table();
    let mut inv2 = c2.inverse_table();
    for _ in 0..repeats {
        let i = rng.random_range(0..n);
        let v1 = c1.0[i];
        let v2 = c2.0[i];
        let j = inv2[v1 as usize] as usize;
        let k = inv1[v2 as usize] as usize;
        // swap i and j in the first copy
        inv1.swap(c1.0[i] as usize, c1.0[j] as usize);
        c1.0.swap(i, j);
        // swap i and k in the second copy
        inv2.swap(c2.0[i] as usize, c2.0[k] as usize);
        c2.0.swap(i, k);
    }
    (c1, c2)
}

/// Draws the number of transpositions for one mutation: Poisson with the
/// given mean (0 yields no mutation).
pub fn poisson_swap_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let poisson = Poisson::new(mean).expect("positive finite mean");
    poisson.sample(rng) as u64
}

/// Applies `m ~ Poisson(mean)` random transpositions in place; each swaps
/// two distinct positions.
pub fn swap_mutation<R: Rng + ?Sized>(p: &mut Permutation, mean: f64, rng: &mut R) {
    let m = poisson_swap_count(mean, rng);
    apply_random_transpositions(p, m, rng);
}

fn apply_random_transpositions<R: Rng + ?Sized>(p: &mut Permutation, count: u64, rng: &mut R) {
    let n = p.len();
    debug_assert!(n >= 2 || count == 0);
    for _ in 0..count {
        let i = rng.random_range(0..n);
        let j = (i + 1 + rng.random_range(0..n - 1)) % n;
        p.swap(i, j);
    }
}

/// How the offspring takes over its cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReplacementPolicy {
    /// The offspring always replaces the incumbent (the classic cellular
    /// GA step; the cell is not elitist, the global best is bookkeeping).
    Always,
    /// The offspring replaces the incumbent only when strictly cheaper, or
    /// on a fair coin at exactly equal cost (the selection-experiment
    /// rule). Every cell is elitist under this policy.
    IfNotWorse,
}

/// Cellular GA settings for the QAP runs.
#[derive(Clone, Debug)]
pub struct CgaConfig {
    pub shape: GridShape,
    pub params: AnisotropyParams,
    pub tournament: TournamentConfig,
    pub generations: u32,
    pub crossover_rate: f64,
    pub mutation_mean: f64,
    /// Apply exactly one transposition per offspring instead of a Poisson
    /// count (sensitivity mode).
    pub fixed_one_swap: bool,
    /// Crossover rounds; `None` means `n / 3` (integer division).
    pub upmx_repeats: Option<usize>,
    pub replacement: ReplacementPolicy,
    pub base_seed: u64,
}

impl CgaConfig {
    pub fn new(params: AnisotropyParams, base_seed: u64) -> Self {
        Self {
            shape: GridShape::new(20, 20).expect("static shape"),
            params,
            tournament: TournamentConfig::binary(),
            generations: 1500,
            crossover_rate: 1.0,
            mutation_mean: 1.0,
            fixed_one_swap: false,
            upmx_repeats: None,
            replacement: ReplacementPolicy::Always,
            base_seed,
        }
    }

    pub fn repeats_for(&self, n: usize) -> usize {
        self.upmx_repeats.unwrap_or(n / 3)
    }
}

#[derive(Clone, Debug)]
struct QapIndividual {
    perm: Permutation,
    cost: f64,
}

/// Outcome of one cGA run.
#[derive(Clone, Debug)]
pub struct RunStats {
    /// Global best cost after each generation; index 0 is the best of the
    /// random initial population. Non-increasing.
    pub best_cost_per_generation: Vec<f64>,
    pub final_best_cost: f64,
    pub final_best: Permutation,
    pub replicate: u32,
}

/// Runs the cellular GA: per cell and generation, two anisotropic
/// tournaments pick the parents, crossover (at the configured rate) and
/// mutation build an offspring, and the offspring replaces the incumbent
/// if strictly cheaper or on a fair coin at equal cost.
pub fn run_cga(instance: &QapInstance, cfg: &CgaConfig, replicate: u32) -> RunStats {
    assert!(
        (0.0..=1.0).contains(&cfg.crossover_rate),
        "crossover rate {} outside [0, 1]",
        cfg.crossover_rate
    );
    assert!(cfg.mutation_mean >= 0.0, "mutation mean {} negative", cfg.mutation_mean);

    let n = instance.n();
    let repeats = cfg.repeats_for(n);
    let dist = NeighborDistribution::new(cfg.params);
    let tournament = cfg.tournament;
    let stream = RunStream::new(cfg.base_seed, replicate as u64);
    let fitness = |ind: &QapIndividual| -ind.cost;
    let poisson = (cfg.mutation_mean > 0.0 && !cfg.fixed_one_swap)
        .then(|| Poisson::new(cfg.mutation_mean).expect("positive finite mutation mean"));

    let mut grid = TorusGrid::from_fn(cfg.shape, |c| {
        let idx = cfg.shape.index_of(c) as u64;
        let mut rng = stream.rng(0, idx);
        let perm = Permutation::random(n, &mut rng);
        let cost = objective(instance, &perm);
        QapIndividual { perm, cost }
    });
    let mut scratch = grid.clone();

    let mut best = grid
        .cells()
        .iter()
        .min_by(|a, b| a.cost.partial_cmp(&b.cost).unwrap())
        .expect("non-empty grid")
        .clone();
    let mut best_per_gen = Vec::with_capacity(cfg.generations as usize + 1);
    best_per_gen.push(best.cost);

    for gen in 1..=cfg.generations {
        grid.synchronous_step_into(&mut scratch, &stream, gen as u64, |snap, c, rng| {
            let first = anisotropic_tournament(snap, c, &dist, tournament, fitness, rng);
            let second = anisotropic_tournament(snap, c, &dist, tournament, fitness, rng);
            let parent1 = snap.get(first);
            let parent2 = snap.get(second);

            let crossed = rng.random_bool(cfg.crossover_rate);
            let mut child = if crossed {
                let (c1, c2) = upmx_crossover(&parent1.perm, &parent2.perm, repeats, rng);
                let cost1 = objective(instance, &c1);
                let cost2 = objective(instance, &c2);
                if cost2 < cost1 {
                    QapIndividual { perm: c2, cost: cost2 }
                } else {
                    QapIndividual { perm: c1, cost: cost1 }
                }
            } else if parent1.cost <= parent2.cost {
                parent1.clone()
            } else {
                parent2.clone()
            };

            let swaps = if cfg.fixed_one_swap {
                1
            } else {
                poisson.as_ref().map_or(0, |p| p.sample(rng) as u64)
            };
            if swaps > 0 {
                apply_random_transpositions(&mut child.perm, swaps, rng);
                child.cost = objective(instance, &child.perm);
            }

            match cfg.replacement {
                ReplacementPolicy::Always => child,
                ReplacementPolicy::IfNotWorse => replace(snap.get(c), &child, fitness, rng).clone(),
            }
        });
        std::mem::swap(&mut grid, &mut scratch);

        let gen_best = grid
            .cells()
            .iter()
            .min_by(|a, b| a.cost.partial_cmp(&b.cost).unwrap())
            .expect("non-empty grid");
        if gen_best.cost < best.cost {
            best = gen_best.clone();
        }
        best_per_gen.push(best.cost);
    }

    RunStats {
        final_best_cost: best.cost,
        final_best: best.perm,
        best_cost_per_generation: best_per_gen,
        replicate,
    }
}

/// One row of an anisotropy sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepRow {
    pub alpha: f64,
    pub mean_best: f64,
    pub std_best: f64,
    pub min_best: f64,
    pub runs: u32,
}

/// Repeats [`run_cga`] `runs_per_alpha` times per degree and aggregates the
/// final best costs. Runs share replicate seeds across degrees (common
/// random numbers), and rows come back sorted by `alpha`.
pub fn alpha_sweep(
    instance: &QapInstance,
    alphas: &[f64],
    runs_per_alpha: u32,
    cfg: &CgaConfig,
) -> Vec<SweepRow> {
    let mut sorted: Vec<f64> = alphas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted
        .iter()
        .map(|&alpha| {
            let run_cfg = CgaConfig {
                params: AnisotropyParams::new(alpha).expect("sweep alphas validated upstream"),
                ..cfg.clone()
            };
            let costs: Vec<f64> = (0..runs_per_alpha)
                .into_par_iter()
                .map(|r| run_cga(instance, &run_cfg, r).final_best_cost)
                .collect();
            let s = Summary::of(&costs).expect("at least one run per alpha");
            SweepRow {
                alpha,
                mean_best: s.mean,
                std_best: s.std,
                min_best: s.min,
                runs: runs_per_alpha,
            }
        })
        .collect()
}

/// Parses a QAPLIB-style solution file: declared size and cost on the
/// first line, then the permutation with 1-based entries. The permutation
/// lists, per facility in file order, the location assigned to it under
/// the solution-file convention; callers decide how to interpret it.
pub fn parse_solution_file(text: &str) -> Result<(usize, f64, Vec<usize>), QapError> {
    let mut tokens = text.split_whitespace();
    let n: usize = tokens
        .next()
        .ok_or_else(|| QapError::BadSolutionFile("empty file".into()))?
        .parse()
        .map_err(|_| QapError::BadSolutionFile("bad size".into()))?;
    let cost: f64 = tokens
        .next()
        .ok_or_else(|| QapError::BadSolutionFile("missing cost".into()))?
        .parse()
        .map_err(|_| QapError::BadSolutionFile("bad cost".into()))?;
    let perm: Vec<usize> = tokens
        .map(|t| t.parse::<usize>().map_err(|_| QapError::BadSolutionFile(format!("bad entry `{t}`"))))
        .collect::<Result<_, _>>()?;
    if perm.len() != n {
        return Err(QapError::BadSolutionFile(format!(
            "expected {n} permutation entries, found {}",
            perm.len()
        )));
    }
    if perm.iter().any(|&v| v == 0 || v > n) {
        return Err(QapError::BadSolutionFile("entries must be 1-based".into()));
    }
    Ok((n, cost, perm.into_iter().map(|v| v - 1).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RunStream;

    fn toy2() -> QapInstance {
        QapInstance::parse("2  0 3 3 0  0 1 1 0", "toy2").unwrap()
    }

    #[test]
    fn parses_the_toy_instance() {
        let inst = toy2();
        assert_eq!(inst.n(), 2);
        assert_eq!((inst.flow(0, 1), inst.flow(1, 0)), (3.0, 3.0));
        assert_eq!((inst.distance(0, 1), inst.distance(1, 0)), (1.0, 1.0));
        assert_eq!((inst.flow(0, 0), inst.distance(1, 1)), (0.0, 0.0));
    }

    #[test]
    fn truncated_input_reports_token_counts() {
        match QapInstance::parse("3  0 1 0 1", "bad") {
            Err(QapError::WrongTokenCount { n: 3, expected: 19, found: 5 }) => {}
            other => panic!("unexpected parse outcome: {other:?}"),
        }
    }

    #[test]
    fn bad_tokens_are_rejected() {
        assert!(matches!(QapInstance::parse("", "e"), Err(QapError::MissingSize)));
        assert!(matches!(QapInstance::parse("-2 1 1", "e"), Err(QapError::BadSize(_))));
        assert!(matches!(QapInstance::parse("x 1 1", "e"), Err(QapError::BadSize(_))));
        assert!(matches!(
            QapInstance::parse("2 0 3 3 0 0 1 one 0", "e"),
            Err(QapError::NonNumeric { position: 8, .. })
        ));
        assert!(matches!(
            QapInstance::parse("2 0 3 3 0 0 1 -1 0", "e"),
            Err(QapError::NegativeEntry { .. })
        ));
    }

    #[test]
    fn objective_on_the_toy_instance() {
        let inst = toy2();
        let id = Permutation::identity(2);
        assert_eq!(objective(&inst, &id), 6.0);
        let swapped = Permutation::new(vec![1, 0]).unwrap();
        assert_eq!(objective(&inst, &swapped), 6.0);
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::new(vec![0, 1, 2]).is_ok());
        assert!(Permutation::new(vec![0, 0, 2]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        assert!(Permutation::identity(5).is_valid());
    }

    #[test]
    fn upmx_matches_the_hand_trace() {
        // parents [1,2,3] and [3,1,2] (1-based); one round at position 1
        // swaps p1 positions (1,2) and p2 positions (1,3), both to [2,1,3]
        let p1 = Permutation::new(vec![0, 1, 2]).unwrap();
        let p2 = Permutation::new(vec![2, 0, 1]).unwrap();
        // a stream whose first draw lands on position 0
        use rand::RngExt;
        let mut rng = (0..100u64)
            .map(|s| RunStream::new(s, 0).rng(0, 0))
            .find(|r| r.clone().random_range(0..3usize) == 0)
            .expect("some stream draws position 0 first");
        let (c1, c2) = upmx_crossover(&p1, &p2, 1, &mut rng);
        let expect = Permutation::new(vec![1, 0, 2]).unwrap();
        assert_eq!(c1, expect);
        assert_eq!(c2, expect);
    }

    #[test]
    fn upmx_of_identical_parents_is_identity() {
        let p = Permutation::new(vec![3, 1, 4, 0, 2]).unwrap();
        let mut rng = RunStream::new(2, 0).rng(0, 0);
        let (c1, c2) = upmx_crossover(&p, &p, 5, &mut rng);
        assert_eq!(c1, p);
        assert_eq!(c2, p);
    }

    #[test]
    fn upmx_preserves_validity() {
        let mut rng = RunStream::new(3, 0).rng(0, 0);
        for _ in 0..2000 {
            let a = Permutation::random(30, &mut rng);
            let b = Permutation::random(30, &mut rng);
            let (c1, c2) = upmx_crossover(&a, &b, 10, &mut rng);
            assert!(c1.is_valid() && c2.is_valid());
        }
    }

    #[test]
    fn zero_mean_mutation_is_identity() {
        let p = Permutation::identity(10);
        let mut q = p.clone();
        let mut rng = RunStream::new(4, 0).rng(0, 0);
        swap_mutation(&mut q, 0.0, &mut rng);
        assert_eq!(p, q);
    }

    #[test]
    fn mutation_preserves_validity() {
        let mut rng = RunStream::new(5, 0).rng(0, 0);
        for _ in 0..2000 {
            let mut p = Permutation::random(30, &mut rng);
            swap_mutation(&mut p, 1.0, &mut rng);
            assert!(p.is_valid());
        }
    }

    #[test]
    fn transpositions_touch_distinct_positions() {
        let mut rng = RunStream::new(6, 0).rng(0, 0);
        for _ in 0..500 {
            let mut p = Permutation::identity(2);
            apply_random_transpositions(&mut p, 1, &mut rng);
            // on two elements a real transposition always swaps them
            assert_eq!(p, Permutation::new(vec![1, 0]).unwrap());
        }
    }

    #[test]
    fn zero_generations_returns_the_initial_best() {
        let inst = toy2();
        let mut cfg = CgaConfig::new(AnisotropyParams::isotropic(), 8);
        cfg.shape = GridShape::new(4, 4).unwrap();
        cfg.generations = 0;
        let stats = run_cga(&inst, &cfg, 0);
        assert_eq!(stats.best_cost_per_generation.len(), 1);
        assert_eq!(stats.final_best_cost, 6.0); // every 2-permutation costs 6
        assert_eq!(stats.best_cost_per_generation[0], stats.final_best_cost);
    }

    #[test]
    fn global_best_is_non_increasing() {
        let text = "4 \
                    0 5 2 4  5 0 3 0  2 3 0 0  4 0 0 0 \
                    0 1 2 3  1 0 1 2  2 1 0 1  3 2 1 0";
        let inst = QapInstance::parse(text, "toy4").unwrap();
        let mut cfg = CgaConfig::new(AnisotropyParams::new(0.5).unwrap(), 13);
        cfg.shape = GridShape::new(6, 6).unwrap();
        cfg.generations = 40;
        let stats = run_cga(&inst, &cfg, 1);
        assert_eq!(stats.best_cost_per_generation.len(), 41);
        for w in stats.best_cost_per_generation.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert_eq!(*stats.best_cost_per_generation.last().unwrap(), stats.final_best_cost);
        assert!(stats.final_best.is_valid());
    }

    #[test]
    fn copy_only_dynamics_create_no_new_genotypes() {
        use std::collections::HashSet;
        let text = "4 \
                    0 5 2 4  5 0 3 0  2 3 0 0  4 0 0 0 \
                    0 1 2 3  1 0 1 2  2 1 0 1  3 2 1 0";
        let inst = QapInstance::parse(text, "toy4").unwrap();
        let mut cfg = CgaConfig::new(AnisotropyParams::isotropic(), 21);
        cfg.shape = GridShape::new(5, 5).unwrap();
        cfg.generations = 0;
        cfg.crossover_rate = 0.0;
        cfg.mutation_mean = 0.0;

        // reconstruct the initial population from the same streams
        let stream = RunStream::new(cfg.base_seed, 2);
        let initial: HashSet<Vec<usize>> = (0..25u64)
            .map(|i| Permutation::random(4, &mut stream.rng(0, i)).iter().collect())
            .collect();

        // replay the run with copy-only dynamics for a few generations
        let mut run_cfg = cfg.clone();
        run_cfg.generations = 25;
        let stats = run_cga(&inst, &run_cfg, 2);
        assert!(initial.contains(&stats.final_best.iter().collect::<Vec<_>>()));
    }

    #[test]
    fn solution_file_parsing() {
        let (n, cost, perm) = parse_solution_file(" 3 42\n2 3 1").unwrap();
        assert_eq!((n, cost), (3, 42.0));
        assert_eq!(perm, vec![1, 2, 0]);
        assert!(parse_solution_file("3 42\n2 3").is_err());
        assert!(parse_solution_file("3 42\n0 1 2").is_err());
    }

    #[test]
    fn matrix_role_verification_swaps_when_needed() {
        // asymmetric roles: identity must cost 6 with flow-first parsing
        let flow_first = QapInstance::parse("2  0 3 3 0  0 1 1 0", "ff").unwrap();
        let id = Permutation::identity(2);
        assert_eq!(objective(&flow_first, &id), 6.0);
        let verified = flow_first.with_verified_roles(&id, 6.0).unwrap();
        assert_eq!(objective(&verified, &id), 6.0);

        // distance-first variant of an instance where the roles matter
        let dist_first = QapInstance::parse("2  0 1 1 0  0 3 3 0", "df").unwrap();
        let verified = dist_first.with_verified_roles(&id, 6.0).unwrap();
        assert_eq!(objective(&verified, &id), 6.0);

        let wrong = QapInstance::parse("2  0 1 1 0  0 3 3 0", "w")
            .unwrap()
            .with_verified_roles(&id, 7.0);
        assert!(matches!(wrong, Err(QapError::CertificateMismatch { .. })));
    }
}
