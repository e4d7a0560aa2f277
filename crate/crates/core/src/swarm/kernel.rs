//! Canonical continuous PSO update.
//!
//! `v ← v + c1·r1·(pbest − x) + c2·r2·(gbest − x)` then `x ← x + v`, with
//! fresh `r1, r2 ∈ (0, 1)` drawn per element (r1 first). The discrete search
//! in this crate does not use it; it is the reference the discrete phases
//! are adapted from.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub fn velocity_update(
    present: &[f64],
    velocity: &[f64],
    pbest: &[f64],
    gbest: &[f64],
    c1: f64,
    c2: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let n = present.len();
    for other in [velocity.len(), pbest.len(), gbest.len()] {
        if other != n {
            return Err(Error::LengthMismatch(n, other));
        }
    }
    Ok((0..n)
        .map(|i| {
            let r1: f64 = rng.sample(Open01);
            let r2: f64 = rng.sample(Open01);
            velocity[i] + c1 * r1 * (pbest[i] - present[i]) + c2 * r2 * (gbest[i] - present[i])
        })
        .collect())
}

pub fn velocity_update_seeded(
    present: &[f64],
    velocity: &[f64],
    pbest: &[f64],
    gbest: &[f64],
    c1: f64,
    c2: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    velocity_update(present, velocity, pbest, gbest, c1, c2, &mut rng)
}

pub fn position_update(present: &[f64], velocity: &[f64]) -> Result<Vec<f64>> {
    if present.len() != velocity.len() {
        return Err(Error::LengthMismatch(present.len(), velocity.len()));
    }
    Ok(present.iter().zip(velocity).map(|(x, v)| x + v).collect())
}
