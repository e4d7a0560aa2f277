use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ff_activity_fitness, mutate, stream, Particle, SwarmConfig};
use crate::error::{Error, Result};
use crate::netlist::Circuit;
use crate::simcore::{
    check_width, fault_simulate_parallel, simulate_step, Fault, SimMode, SimOptions, StepResult,
    TestVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    /// Taken unchanged from the population.
    Population { index: usize },
    /// Produced by mutating population member `index`, `generation` rounds deep.
    Mutant { index: usize, generation: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbestEntry {
    pub particle: Particle,
    /// Indices into the fault list first detected by this entry.
    pub new_faults: Vec<usize>,
    pub cumulative_detected: usize,
    pub origin: Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    AllDetected,
    Stagnation,
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PbestStats {
    pub candidates: usize,
    pub mutants: usize,
}

/// The retained high-coverage vectors, in acceptance order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbestMemory {
    pub entries: Vec<PbestEntry>,
    pub total_faults: usize,
    pub termination: Termination,
    pub stats: PbestStats,
}

impl PbestMemory {
    pub fn vectors(&self) -> Vec<TestVector> {
        self.entries
            .iter()
            .map(|e| e.particle.vector.clone())
            .collect()
    }

    pub fn detected(&self) -> usize {
        self.entries.last().map_or(0, |e| e.cumulative_detected)
    }

    pub fn coverage(&self) -> f64 {
        self.detected() as f64 / self.total_faults.max(1) as f64
    }

    pub fn cumulative_coverage(&self) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| e.cumulative_detected as f64 / self.total_faults.max(1) as f64)
            .collect()
    }
}

struct Search<'a> {
    c: &'a Circuit,
    faults: &'a [Fault],
    sim: SimOptions,
    undetected: Vec<usize>,
    entries: Vec<PbestEntry>,
    tail: Option<StepResult>,
}

impl Search<'_> {
    /// Faults in `undetected` that `v` detects when appended to the memory.
    fn fresh(&self, v: &TestVector) -> Result<Vec<usize>> {
        if self.undetected.is_empty() {
            return Ok(Vec::new());
        }
        let subset: Vec<Fault> = self.undetected.iter().map(|&i| self.faults[i]).collect();
        let vectors: Vec<TestVector> = match self.sim.mode {
            SimMode::Scan => vec![v.clone()],
            SimMode::Functional => self
                .entries
                .iter()
                .map(|e| e.particle.vector.clone())
                .chain(std::iter::once(v.clone()))
                .collect(),
        };
        let report = fault_simulate_parallel(self.c, &vectors, &subset, self.sim)?;
        Ok(report
            .detected
            .iter()
            .map(|&k| self.undetected[k])
            .collect())
    }

    fn prev_state(&self) -> Vec<bool> {
        match &self.tail {
            Some(s) => s.next_state.clone(),
            None => vec![false; self.c.dffs().len()],
        }
    }

    fn activity(&self, v: &TestVector) -> Result<usize> {
        ff_activity_fitness(self.c, v, &self.prev_state())
    }

    fn accept(
        &mut self,
        v: TestVector,
        fresh: Vec<usize>,
        ff_activity: usize,
        origin: Origin,
    ) -> Result<()> {
        self.undetected.retain(|f| !fresh.contains(f));
        let step = simulate_step(self.c, &v, self.sim.mode, self.tail.as_ref())?;
        self.tail = Some(step);
        let cumulative_detected = self.faults.len() - self.undetected.len();
        self.entries.push(PbestEntry {
            particle: Particle {
                vector: v,
                fitness: fresh.len() as f64 / self.faults.len() as f64,
                ff_activity,
            },
            new_faults: fresh,
            cumulative_detected,
            origin,
        });
        Ok(())
    }
}

/// Selects vectors that each detect at least one fault not detected by the
/// vectors kept before them.
///
/// Population members are visited in order of decreasing individual
/// coverage (ties by index). A member that detects new faults is kept. Each
/// visited member is then hill-climbed: up to `mutation_limit` mutants are
/// tried, the best one (most new faults, then fewest flip-flop changes,
/// then first generated) is kept if it contributes, and the search
/// continues from it with a fresh mutation budget. A member that yields
/// nothing at all bumps the stagnation counter. Members are revisited
/// round-robin until every fault is detected or the stagnation limit is
/// reached; with mutation disabled a single pass is made.
///
/// In scan mode the kept vectors are finally re-verified in order of
/// decreasing fitness: the vector detecting the most still-undetected
/// faults goes first, and vectors left with nothing to add are dropped.
pub fn pbest_phase(
    c: &Circuit,
    population: &[TestVector],
    faults: &[Fault],
    cfg: &SwarmConfig,
    sim: SimOptions,
) -> Result<PbestMemory> {
    if population.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if faults.is_empty() {
        return Err(Error::EmptyFaultList);
    }
    cfg.validate()?;
    population.iter().try_for_each(|v| check_width(c, v))?;

    let rate = cfg.effective_mutation_rate(c.width());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream::MUTATION);

    let mut search = Search {
        c,
        faults,
        sim,
        undetected: (0..faults.len()).collect(),
        entries: Vec::new(),
        tail: None,
    };
    let mut stats = PbestStats::default();

    let mut ranked: Vec<(usize, usize)> = population
        .iter()
        .enumerate()
        .map(|(i, v)| search.fresh(v).map(|f| (i, f.len())))
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    // Without mutation a second pass cannot find anything new.
    let passes = if cfg.mutation_limit == 0 {
        1
    } else {
        usize::MAX
    };
    let mut stagnation = 0;
    let mut termination = Termination::Exhausted;
    for &(index, _) in ranked
        .iter()
        .cycle()
        .take(ranked.len().saturating_mul(passes))
    {
        if search.undetected.is_empty() {
            break;
        }
        stats.candidates += 1;
        let mut contributed = false;
        let mut current = population[index].clone();
        let fresh = search.fresh(&current)?;
        if !fresh.is_empty() {
            let act = search.activity(&current)?;
            search.accept(current.clone(), fresh, act, Origin::Population { index })?;
            contributed = true;
        }

        let mut generation = 0;
        while cfg.mutation_limit > 0 && !search.undetected.is_empty() {
            let mut best: Option<(TestVector, Vec<usize>, usize)> = None;
            for _ in 0..cfg.mutation_limit {
                let m = mutate(&current, rate, &mut rng);
                stats.mutants += 1;
                let fresh = search.fresh(&m)?;
                if fresh.is_empty() {
                    continue;
                }
                let act = search.activity(&m)?;
                let better = match &best {
                    None => true,
                    Some((_, bf, ba)) => {
                        fresh.len() > bf.len() || (fresh.len() == bf.len() && act < *ba)
                    }
                };
                if better {
                    best = Some((m, fresh, act));
                }
            }
            let Some((m, fresh, act)) = best else { break };
            generation += 1;
            search.accept(m.clone(), fresh, act, Origin::Mutant { index, generation })?;
            contributed = true;
            current = m;
        }

        if contributed {
            stagnation = 0;
        } else {
            stagnation += 1;
            if stagnation >= cfg.stagnation_limit {
                termination = Termination::Stagnation;
                break;
            }
        }
    }
    if search.undetected.is_empty() {
        termination = Termination::AllDetected;
    }
    let entries = match sim.mode {
        SimMode::Scan => reverify(c, faults, search.entries, sim)?,
        SimMode::Functional => search.entries,
    };

    Ok(PbestMemory {
        entries,
        total_faults: faults.len(),
        termination,
        stats,
    })
}

/// Re-orders entries by decreasing fitness against the faults still
/// undetected and drops entries that no longer contribute. Scan-mode
/// detection of a vector does not depend on its neighbours, so each
/// entry's detection set is computed once.
fn reverify(
    c: &Circuit,
    faults: &[Fault],
    entries: Vec<PbestEntry>,
    sim: SimOptions,
) -> Result<Vec<PbestEntry>> {
    let sets: Vec<Vec<usize>> = entries
        .iter()
        .map(|e| {
            fault_simulate_parallel(c, std::slice::from_ref(&e.particle.vector), faults, sim)
                .map(|r| r.detected)
        })
        .collect::<Result<_>>()?;
    let mut covered = vec![false; faults.len()];
    let mut used = vec![false; entries.len()];
    let mut order = Vec::new();
    loop {
        let mut best: Option<(usize, usize)> = None;
        for (i, set) in sets.iter().enumerate() {
            if used[i] {
                continue;
            }
            let gain = set.iter().filter(|&&f| !covered[f]).count();
            if gain > 0 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        let Some((i, _)) = best else { break };
        used[i] = true;
        order.push(i);
        for &f in &sets[i] {
            covered[f] = true;
        }
    }

    let mut slots: Vec<Option<PbestEntry>> = entries.into_iter().map(Some).collect();
    let mut seen = vec![false; faults.len()];
    let mut prev_state = vec![false; c.dffs().len()];
    let mut cumulative = 0;
    let mut out = Vec::with_capacity(order.len());
    for i in order {
        let mut e = slots[i].take().expect("each entry is used once");
        e.new_faults = sets[i].iter().copied().filter(|&f| !seen[f]).collect();
        for &f in &e.new_faults {
            seen[f] = true;
        }
        cumulative += e.new_faults.len();
        e.cumulative_detected = cumulative;
        e.particle.fitness = e.new_faults.len() as f64 / faults.len() as f64;
        e.particle.ff_activity = ff_activity_fitness(c, &e.particle.vector, &prev_state)?;
        prev_state = simulate_step(c, &e.particle.vector, sim.mode, None)?.next_state;
        out.push(e);
    }
    Ok(out)
}
