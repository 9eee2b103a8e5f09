//! Seeded randomness shared by every stochastic routine.

use crate::scalar::Scalar;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for item `index` under a run seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1))
}

pub fn gaussian<T: Scalar>(rng: &mut Rng) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::lit(z)
}

pub fn gaussian_vec<T: Scalar>(rng: &mut Rng, n: usize) -> Vec<T> {
    (0..n).map(|_| gaussian(rng)).collect()
}
