//! Seeded random sampling for trials, test fields, and Krylov start vectors.

use crate::lie::LieValue;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The single generator type used across the crate.
pub type TrialRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample in `[-1, 1)`.
#[inline]
pub fn sym(rng: &mut TrialRng) -> f64 {
    rng.gen_range(-1.0..1.0)
}

/// Standard normal sample (Box–Muller).
pub fn normal(rng: &mut TrialRng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}

/// Lie value with uniform coefficients in `[-1, 1)`.
pub fn lie(rng: &mut TrialRng) -> LieValue {
    LieValue::new(sym(rng), sym(rng), sym(rng))
}
