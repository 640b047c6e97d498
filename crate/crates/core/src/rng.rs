//! Seeded, splittable randomness.
//!
//! Every stochastic routine takes a `&mut RngHandle`. Parallel work never
//! shares a handle: it forks indexed children up front, so results do not
//! depend on scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// A ChaCha8 stream identified by its seed.
#[derive(Debug, Clone)]
pub struct RngHandle {
    seed: u64,
    inner: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream. Depends only on this handle's seed and
    /// `index`, never on how much of the parent stream has been consumed.
    pub fn fork(&self, index: u64) -> RngHandle {
        RngHandle::new(splitmix64(
            self.seed ^ splitmix64(index.wrapping_add(0xA5A5_5A5A)),
        ))
    }

    pub fn uniform(&mut self, lower: f64, upper: f64) -> f64 {
        if lower == upper {
            return lower;
        }
        self.inner.random_range(lower..upper)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn normal(&mut self, mean: f64, std_dev: f64) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.inner);
        mean + std_dev * z
    }

    /// Gamma(shape, scale). Both arguments must be positive and finite.
    pub fn gamma(&mut self, shape: f64, scale: f64) -> f64 {
        Gamma::new(shape, scale)
            .expect("gamma parameters validated by caller")
            .sample(&mut self.inner)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}
