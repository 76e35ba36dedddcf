//! Shared fixtures for the criterion benches.

use plumenav_core::{Vec3, VelocitySeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Alternating calm and erratic stretches of `block` samples each.
pub fn regime_series(len: usize, block: usize, seed: u64) -> VelocitySeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..len)
        .map(|i| {
            if (i / block).is_multiple_of(2) {
                Vec3::new(0.35, rng.random_range(-0.02..0.02), 0.0)
            } else {
                let side = if (i / 30) % 2 == 0 { 0.3 } else { -0.3 };
                Vec3::new(0.08, side + rng.random_range(-0.05..0.05), 0.0)
            }
        })
        .collect();
    VelocitySeries::new(values)
}
