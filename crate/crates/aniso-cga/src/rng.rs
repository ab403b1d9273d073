//! Deterministic seed derivation and per-cell random streams.
//!
//! Every cell update in a generation draws from its own short-lived stream
//! seeded from `(base seed, replicate, generation, cell index)`. Because no
//! stream is shared between cells, results are identical regardless of
//! traversal order or worker-thread count.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

/// Generator handed to a single cell update (or other leaf computation).
///
/// PCG64-MCG: tiny state, fast initialization, stable stream definition.
pub type CellRng = Pcg64Mcg;

const ROUND_A: u64 = 0x9e37_79b9_7f4a_7c15;
const ROUND_B: u64 = 0xa076_1d64_78bd_642f;
const ROUND_C: u64 = 0xe703_7ed1_a0b4_28db;

/// SplitMix64 finalizer; a bijection on `u64`.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes the four stream coordinates into one 64-bit stream seed.
///
/// Each coordinate is absorbed through a full avalanche round, so seeds for
/// distinct tuples are effectively independent. The mapping is fixed: the
/// same inputs give the same seed on every platform and build.
#[inline]
pub fn derive_seed(base_seed: u64, replicate: u64, generation: u64, cell_index: u64) -> u64 {
    let mut h = mix64(base_seed ^ ROUND_A);
    h = mix64((h ^ replicate).wrapping_add(ROUND_B));
    h = mix64((h ^ generation).wrapping_add(ROUND_C));
    mix64((h ^ cell_index).wrapping_add(ROUND_A))
}

/// Stream factory for one replicate of an experiment.
#[derive(Clone, Copy, Debug)]
pub struct RunStream {
    base_seed: u64,
    replicate: u64,
}

impl RunStream {
    pub fn new(base_seed: u64, replicate: u64) -> Self {
        Self { base_seed, replicate }
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn replicate(&self) -> u64 {
        self.replicate
    }

    /// The random stream for one `(generation, cell)` pair.
    #[inline]
    pub fn rng(&self, generation: u64, cell_index: u64) -> CellRng {
        CellRng::seed_from_u64(derive_seed(
            self.base_seed,
            self.replicate,
            generation,
            cell_index,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::collections::HashSet;

    #[test]
    fn same_inputs_same_seed() {
        assert_eq!(derive_seed(42, 1, 2, 3), derive_seed(42, 1, 2, 3));
        let mut a = RunStream::new(7, 0).rng(5, 11);
        let mut b = RunStream::new(7, 0).rng(5, 11);
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn replicate_changes_seed() {
        for s in [0u64, 1, 42, u64::MAX, 0xdead_beef] {
            assert_ne!(derive_seed(s, 0, 0, 0), derive_seed(s, 1, 0, 0));
        }
    }

    #[test]
    fn no_collisions_over_a_million_tuples() {
        // 100 replicates x 100 generations x 100 cells, one base seed.
        let mut seen = HashSet::with_capacity(1_000_000);
        for r in 0..100u64 {
            for g in 0..100u64 {
                for c in 0..100u64 {
                    assert!(seen.insert(derive_seed(42, r, g, c)), "collision at {r},{g},{c}");
                }
            }
        }
    }

    #[test]
    fn coordinates_are_not_interchangeable() {
        // (r, g, c) permuted must not alias.
        assert_ne!(derive_seed(1, 2, 3, 4), derive_seed(1, 3, 2, 4));
        assert_ne!(derive_seed(1, 2, 3, 4), derive_seed(1, 4, 3, 2));
        assert_ne!(derive_seed(1, 2, 3, 4), derive_seed(1, 2, 4, 3));
    }
}
