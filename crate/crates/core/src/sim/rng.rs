use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::demand::unit_uniform;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replication `rep`: `base_seed XOR splitmix64(rep)`.
#[inline]
pub fn replication_seed(base_seed: u64, rep: u64) -> u64 {
    base_seed ^ splitmix64(rep)
}

/// Stream of uniforms on `[0, 1)` from a counter-based generator.
///
/// The simulator draws exactly one uniform per product per period, so two
/// policies fed streams with the same seed see common random numbers.
#[derive(Debug, Clone)]
pub struct UniformStream {
    rng: ChaCha8Rng,
    seed: u64,
}

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }

    pub fn for_replication(base_seed: u64, rep: u64) -> Self {
        Self::new(replication_seed(base_seed, rep))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        unit_uniform(&mut self.rng)
    }
}
