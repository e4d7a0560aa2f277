//! Two-phase swarm search for low-power test sets.
//!
//! The pbest phase walks a random population, keeping vectors that detect
//! new faults and hill-climbing around them by mutation. The gbest phase
//! orders the kept vectors into a frame that minimizes weighted gate
//! toggling between consecutive vectors. Velocity is replaced by toggle
//! count and position by bit arrangement; the continuous velocity/position
//! update is kept separately in [`kernel`].

mod exact;
mod frame;
pub mod kernel;
mod pbest;
mod population;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use exact::{exact_min_order, ExactOrder, EXACT_MAX};
pub use frame::{gbest_framing, Frame, FrameStrategy};
pub use pbest::{pbest_phase, Origin, PbestEntry, PbestMemory, PbestStats, Termination};
pub use population::{ff_activity_fitness, init_population, mutate, mutate_seeded};

/// Stream ids that keep the independent random draws of one seed apart.
pub(crate) mod stream {
    pub const POPULATION: u64 = 0;
    pub const MUTATION: u64 = 1;
    pub const BASELINE: u64 = 2;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmConfig {
    pub population_size: usize,
    /// Mutants tried per round before a candidate counts as stagnant.
    pub mutation_limit: usize,
    /// Per-bit flip probability; `2 / width` when unset.
    pub mutation_rate: Option<f64>,
    /// Consecutive noncontributing candidates that end the pbest phase.
    pub stagnation_limit: usize,
    pub seed: u64,
    pub c1: f64,
    pub c2: f64,
    /// Starting gbest toggle value at each frame position; unbounded when unset.
    pub toggle_counter_init: Option<f64>,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            population_size: 32,
            mutation_limit: 5,
            mutation_rate: None,
            stagnation_limit: 20,
            seed: 0,
            c1: 2.0,
            c2: 2.0,
            toggle_counter_init: None,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.population_size == 0 {
            return bad("population_size must be >= 1".into());
        }
        if self.stagnation_limit == 0 {
            return bad("stagnation_limit must be >= 1".into());
        }
        if let Some(r) = self.mutation_rate {
            if !(r > 0.0 && r <= 1.0) {
                return bad(format!("mutation_rate must be in (0, 1], got {r}"));
            }
        }
        if !(self.c1.is_finite() && self.c2.is_finite()) {
            return bad("learning factors must be finite".into());
        }
        if let Some(p) = self.toggle_counter_init {
            if p.is_nan() || p < 0.0 {
                return bad(format!("toggle_counter_init must be >= 0, got {p}"));
            }
        }
        Ok(())
    }

    pub fn effective_mutation_rate(&self, width: usize) -> f64 {
        self.mutation_rate
            .unwrap_or_else(|| (2.0 / width.max(1) as f64).min(1.0))
    }
}

/// A candidate vector with its fitness values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub vector: crate::simcore::TestVector,
    /// Fraction of the fault list newly detected by this vector.
    pub fitness: f64,
    /// Flip-flops whose state changes when the vector is applied.
    pub ff_activity: usize,
}
