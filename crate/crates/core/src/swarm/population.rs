use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::stream;
use crate::error::{Error, Result};
use crate::netlist::Circuit;
use crate::simcore::{simulate_step, SimMode, TestVector};

/// Uniform random vectors, reproducible from `seed`.
pub fn init_population(width: usize, size: usize, seed: u64) -> Vec<TestVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream::POPULATION);
    (0..size)
        .map(|_| TestVector::new((0..width).map(|_| rng.random::<bool>()).collect()))
        .collect()
}

/// Flips each bit independently with probability `rate`.
pub fn mutate(v: &TestVector, rate: f64, rng: &mut impl Rng) -> TestVector {
    let rate = rate.clamp(0.0, 1.0);
    TestVector::new(
        v.bits()
            .iter()
            .map(|&b| b ^ rng.random_bool(rate))
            .collect(),
    )
}

pub fn mutate_seeded(v: &TestVector, rate: f64, seed: u64) -> TestVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream::MUTATION);
    mutate(v, rate, &mut rng)
}

/// Number of flip-flops whose next state differs from `prev_state` when the
/// primary-input part of `v` is applied with the flip-flops holding `prev_state`.
pub fn ff_activity_fitness(c: &Circuit, v: &TestVector, prev_state: &[bool]) -> Result<usize> {
    if prev_state.len() != c.dffs().len() {
        return Err(Error::LengthMismatch(prev_state.len(), c.dffs().len()));
    }
    let mut bits = v.bits().to_vec();
    if bits.len() != c.width() {
        return Err(Error::WidthMismatch {
            expected: c.width(),
            found: bits.len(),
        });
    }
    bits[c.inputs().len()..].copy_from_slice(prev_state);
    let step = simulate_step(c, &TestVector::new(bits), SimMode::Scan, None)?;
    Ok(step
        .next_state
        .iter()
        .zip(prev_state)
        .filter(|(a, b)| a != b)
        .count())
}
