use serde::{Deserialize, Serialize};

use super::SwarmConfig;
use crate::error::{Error, Result};
use crate::netlist::Circuit;
use crate::power::adjacent_hamming;
use crate::simcore::{
    fault_simulate_parallel, incremental_weighted_toggles, simulate_sequence, simulate_step, Fault,
    SimMode, SimOptions, TestVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameStrategy {
    /// Refined from the greedy construction.
    Greedy,
    /// Refined from memory order, which beat the greedy construction.
    MemoryOrder,
}

/// Vectors in application order (T1 first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub vectors: Vec<TestVector>,
    /// Position of each frame vector in the input (memory) order.
    pub order: Vec<usize>,
    pub per_gate_toggles: Vec<u32>,
    pub total_weighted_toggles: f64,
    pub total_adjacent_hamming: usize,
    pub strategy: FrameStrategy,
    /// Positions where no candidate beat the initial toggle counter.
    pub threshold_misses: usize,
    pub refinement_moves: usize,
}

impl Frame {
    /// Builds a frame in the given order and measures it.
    pub fn measure(
        c: &Circuit,
        vectors: &[TestVector],
        order: Vec<usize>,
        caps: &[f64],
        sim: SimOptions,
        strategy: FrameStrategy,
    ) -> Result<Self> {
        let framed: Vec<TestVector> = order.iter().map(|&i| vectors[i].clone()).collect();
        let seq = simulate_sequence(c, &framed, sim.mode, caps)?;
        Ok(Self {
            total_adjacent_hamming: adjacent_hamming(&framed)?,
            vectors: framed,
            order,
            per_gate_toggles: seq.cumulative_toggles,
            total_weighted_toggles: seq.total_weighted,
            strategy,
            threshold_misses: 0,
            refinement_moves: 0,
        })
    }
}

/// Orders `vectors` (the pbest memory, in memory order) into a low-toggle
/// frame.
///
/// The frame starts with the vector of highest individual coverage. At each
/// position the gbest toggle counter starts at `toggle_counter_init` and the
/// remaining vectors are tried in memory order: a vector whose incremental
/// weighted toggle count improves on gbest is kept as the position's
/// choice, any other is set aside and stays eligible for later positions.
/// If nothing beats the initial counter, the cheapest vector is placed
/// anyway so that every memory vector ends up in the frame.
///
/// The constructed frame is then improved while progress is made, by
/// relocating single vectors and reversing segments (T1 stays fixed). Moves
/// are ranked first by adjacent Hamming distance in excess of the
/// memory-order total, then by weighted toggles. Memory order goes through
/// the same refinement and wins if it ends up cheaper, so the result never
/// has a larger adjacent Hamming total than memory order.
pub fn gbest_framing(
    c: &Circuit,
    vectors: &[TestVector],
    faults: &[Fault],
    caps: &[f64],
    cfg: &SwarmConfig,
    sim: SimOptions,
) -> Result<Frame> {
    if vectors.is_empty() {
        return Err(Error::EmptyMemory);
    }
    cfg.validate()?;

    let mut start = 0;
    let mut best_cov = None;
    for (i, v) in vectors.iter().enumerate() {
        let cov = if faults.is_empty() {
            0
        } else {
            fault_simulate_parallel(c, std::slice::from_ref(v), faults, sim)?
                .detected
                .len()
        };
        if best_cov.is_none_or(|b| cov > b) {
            best_cov = Some(cov);
            start = i;
        }
    }

    let mut order = vec![start];
    let mut remaining: Vec<usize> = (0..vectors.len()).filter(|&i| i != start).collect();
    let mut tail = simulate_step(c, &vectors[start], sim.mode, None)?;
    let mut misses = 0;
    while !remaining.is_empty() {
        let mut gbest = cfg.toggle_counter_init.unwrap_or(f64::INFINITY);
        let mut kept = None;
        let mut cheapest: Option<(f64, usize)> = None;
        for (slot, &r) in remaining.iter().enumerate() {
            let (inc, step) = incremental_weighted_toggles(c, &tail, &vectors[r], sim.mode, caps)?;
            if cheapest.is_none_or(|(w, _)| inc < w) {
                cheapest = Some((inc, slot));
            }
            if inc < gbest {
                gbest = inc;
                kept = Some((slot, step));
            }
        }
        let (slot, step) = match kept {
            Some(k) => k,
            None => {
                misses += 1;
                let (_, slot) = cheapest.expect("remaining is non-empty");
                let step = simulate_step(c, &vectors[remaining[slot]], sim.mode, Some(&tail))?;
                (slot, step)
            }
        };
        order.push(remaining.remove(slot));
        tail = step;
    }

    let bound = adjacent_hamming(vectors)?;
    let cost = OrderCost::new(c, vectors, caps, sim, bound)?;
    let (greedy, greedy_moves) = refine(&cost, order);
    let (memory, memory_moves) = refine(&cost, (0..vectors.len()).collect());
    let (order, strategy, moves) = if cost.key(&memory) < cost.key(&greedy) {
        (memory, FrameStrategy::MemoryOrder, memory_moves)
    } else {
        (greedy, FrameStrategy::Greedy, greedy_moves)
    };
    let mut frame = Frame::measure(c, vectors, order, caps, sim, strategy)?;
    frame.threshold_misses = misses;
    frame.refinement_moves = moves;
    Ok(frame)
}

/// Lexicographic cost of an ordering: adjacent Hamming in excess of the
/// memory-order total first, then weighted toggles.
struct OrderCost<'a> {
    c: &'a Circuit,
    vectors: &'a [TestVector],
    caps: &'a [f64],
    sim: SimOptions,
    bound: usize,
    hamming: Vec<Vec<usize>>,
    /// Pairwise weighted toggles; scan-mode steps do not depend on history.
    weighted: Option<Vec<Vec<f64>>>,
}

impl<'a> OrderCost<'a> {
    fn new(
        c: &'a Circuit,
        vectors: &'a [TestVector],
        caps: &'a [f64],
        sim: SimOptions,
        bound: usize,
    ) -> Result<Self> {
        let hamming = vectors
            .iter()
            .map(|a| vectors.iter().map(|b| a.hamming(b)).collect())
            .collect();
        let weighted = match sim.mode {
            SimMode::Scan => {
                let steps: Vec<_> = vectors
                    .iter()
                    .map(|v| simulate_step(c, v, sim.mode, None))
                    .collect::<Result<_>>()?;
                Some(
                    steps
                        .iter()
                        .map(|a| {
                            steps
                                .iter()
                                .map(|b| {
                                    c.gates()
                                        .iter()
                                        .zip(caps)
                                        .filter(|(g, _)| {
                                            a.net_values[g.output] != b.net_values[g.output]
                                        })
                                        .map(|(_, &cap)| cap)
                                        .sum()
                                })
                                .collect()
                        })
                        .collect(),
                )
            }
            SimMode::Functional => None,
        };
        Ok(Self {
            c,
            vectors,
            caps,
            sim,
            bound,
            hamming,
            weighted,
        })
    }

    fn key(&self, order: &[usize]) -> (usize, f64) {
        let h: usize = order.windows(2).map(|w| self.hamming[w[0]][w[1]]).sum();
        let w = match &self.weighted {
            Some(m) => order.windows(2).map(|p| m[p[0]][p[1]]).sum(),
            None => {
                let framed: Vec<TestVector> =
                    order.iter().map(|&i| self.vectors[i].clone()).collect();
                simulate_sequence(self.c, &framed, self.sim.mode, self.caps)
                    .map(|s| s.total_weighted)
                    .unwrap_or(f64::INFINITY)
            }
        };
        (h.saturating_sub(self.bound), w)
    }
}

const REFINE_MAX_PASSES: usize = 200;
/// Sequential-mode orders longer than this are not refined.
const REFINE_MAX_SEQUENTIAL: usize = 32;

fn improves(a: (usize, f64), b: (usize, f64)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1 - 1e-9 * b.1.abs().max(1.0))
}

/// First-improvement local search over single relocations and segment
/// reversals, keeping the first vector in place. Returns the improved order
/// and the number of accepted moves.
fn refine(cost: &OrderCost<'_>, mut order: Vec<usize>) -> (Vec<usize>, usize) {
    let n = order.len();
    if n < 3 || (cost.weighted.is_none() && n > REFINE_MAX_SEQUENTIAL) {
        return (order, 0);
    }
    let mut current = cost.key(&order);
    let mut moves = 0;
    for _ in 0..REFINE_MAX_PASSES {
        let mut progress = false;
        for i in 1..n {
            for j in 1..n {
                if i == j {
                    continue;
                }
                let mut cand = order.clone();
                let v = cand.remove(i);
                cand.insert(j, v);
                let k = cost.key(&cand);
                if improves(k, current) {
                    order = cand;
                    current = k;
                    moves += 1;
                    progress = true;
                }
            }
        }
        for i in 1..n {
            for j in i + 1..n {
                let mut cand = order.clone();
                cand[i..=j].reverse();
                let k = cost.key(&cand);
                if improves(k, current) {
                    order = cand;
                    current = k;
                    moves += 1;
                    progress = true;
                }
            }
        }
        if !progress {
            break;
        }
    }
    (order, moves)
}
