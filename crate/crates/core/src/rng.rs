//! Seeded sampling shared by the probes and studies.
//!
//! Every sampler takes an explicit seed; results do not depend on the number
//! of threads a caller uses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scale factors applied to unit-box samples so that equivalence constants
/// are probed across magnitudes.
pub const MAGNITUDE_SCALES: [f64; 3] = [1e-4, 1.0, 1e4];

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample on `[lo, hi)`.
#[inline]
pub fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Log-uniform sample on `[lo, hi]`, `0 < lo < hi`.
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let a = crate::math::ln(lo);
    let b = crate::math::ln(hi);
    crate::math::exp(uniform(rng, a, b))
}

/// One of [`MAGNITUDE_SCALES`], uniformly.
pub fn magnitude<R: Rng>(rng: &mut R) -> f64 {
    MAGNITUDE_SCALES[rng.random_range(0..MAGNITUDE_SCALES.len())]
}
