//! End-to-end runs and their serialized reports.
//!
//! [`run_frame`] wires parse → fault list → pbest → gbest → power into a
//! [`RunReport`]. Reports serialize with a fixed key order and no
//! wall-clock data unless a timestamp is attached explicitly, so the same
//! inputs always produce the same bytes.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::Circuit;
use crate::power::{adjacent_hamming, estimate_power, PowerModel};
use crate::simcore::{
    enumerate_faults, fault_simulate_parallel, simulate_sequence, DetectionReport, Fault, SimMode,
    SimOptions, TestVector,
};
use crate::swarm::{
    exact_min_order, gbest_framing, init_population, pbest_phase, stream, Origin, SwarmConfig,
    Termination, EXACT_MAX,
};

/// Widest interface for which untestable faults are found by enumeration.
pub const EXHAUSTIVE_MAX_WIDTH: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub swarm: SwarmConfig,
    pub sim: SimOptions,
    pub collapse: bool,
    pub power: PowerModel,
    /// Random orderings averaged for the baseline.
    pub baseline_seeds: usize,
    pub exact_check: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            swarm: SwarmConfig::default(),
            sim: SimOptions::default(),
            collapse: false,
            power: PowerModel::default(),
            baseline_seeds: 100,
            exact_check: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitStats {
    pub name: String,
    pub inputs: usize,
    pub outputs: usize,
    pub dffs: usize,
    pub gates: usize,
    pub width: usize,
}

impl CircuitStats {
    pub fn of(c: &Circuit) -> Self {
        Self {
            name: c.name().to_string(),
            inputs: c.inputs().len(),
            outputs: c.outputs().len(),
            dffs: c.dffs().len(),
            gates: c.gates().len(),
            width: c.width(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultUniverse {
    pub count: usize,
    pub collapsed: bool,
    /// Faults detectable by some vector, when enumeration was feasible.
    pub detectable: Option<usize>,
    pub untestable: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbestRow {
    pub vector: TestVector,
    pub new_faults: usize,
    /// Cumulative coverage of the fault universe, percent.
    pub coverage: f64,
    pub ff_activity: usize,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbestSection {
    pub vectors: Vec<PbestRow>,
    pub termination: Termination,
    pub candidates: usize,
    pub mutants: usize,
    /// Percent of the fault universe.
    pub coverage: f64,
    /// Percent of the detectable faults.
    pub detectable_coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateToggles {
    pub gate: String,
    pub toggles: u32,
    pub capacitance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSection {
    /// Application order, T1 first.
    pub vectors: Vec<TestVector>,
    pub strategy: crate::swarm::FrameStrategy,
    pub adjacent_hamming: usize,
    pub weighted_toggles: f64,
    pub threshold_misses: usize,
    pub refinement_moves: usize,
    pub per_gate: Vec<GateToggles>,
    /// Coverage of the framed sequence, recomputed, percent.
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSection {
    pub memory_order_weighted: f64,
    pub memory_order_hamming: usize,
    pub random_orders: usize,
    pub random_mean_weighted: f64,
    pub random_mean_hamming: f64,
    /// Frame weighted toggles over the random-order mean.
    pub ratio_vs_random: f64,
    pub ratio_vs_memory: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSection {
    pub frame_watts: f64,
    pub memory_order_watts: f64,
    pub random_mean_watts: f64,
    pub ratio_vs_random: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSection {
    pub exact_hamming: usize,
    pub frame_hamming: usize,
    pub gap: usize,
    pub order: Vec<TestVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub circuit: CircuitStats,
    pub faults: FaultUniverse,
    pub pbest: PbestSection,
    pub frame: FrameSection,
    pub baseline: BaselineSection,
    pub power: PowerSection,
    pub exact: Option<ExactSection>,
    pub random_curve: Vec<f64>,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// One vector per line, application order.
    pub fn frame_text(&self) -> String {
        self.frame
            .vectors
            .iter()
            .map(|v| format!("{v}\n"))
            .collect()
    }

    /// Plot-ready cumulative coverage with and without the swarm search.
    pub fn coverage_csv(&self) -> String {
        let mut out = String::from("series,step,vector,coverage\n");
        for (i, row) in self.pbest.vectors.iter().enumerate() {
            let _ = writeln!(out, "pso,{},{},{:.3}", i + 1, row.vector, row.coverage);
        }
        for (i, cov) in self.random_curve.iter().enumerate() {
            let _ = writeln!(out, "random,{},,{:.3}", i + 1, cov);
        }
        out
    }

    pub fn toggles_csv(&self) -> String {
        let mut out = String::from("gate_id,toggles\n");
        for (i, g) in self.frame.per_gate.iter().enumerate() {
            let _ = writeln!(out, "{i},{}", g.toggles);
        }
        out
    }
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Faults no vector can detect, by enumerating the whole input space.
/// `None` when the interface is too wide or the mode is sequential.
pub fn untestable_faults(
    c: &Circuit,
    faults: &[Fault],
    sim: SimOptions,
) -> Result<Option<Vec<usize>>> {
    if sim.mode != SimMode::Scan || c.width() > EXHAUSTIVE_MAX_WIDTH || faults.is_empty() {
        return Ok(None);
    }
    let w = c.width();
    let all: Vec<TestVector> = (0u64..1 << w)
        .map(|m| TestVector::new((0..w).map(|i| m >> (w - 1 - i) & 1 == 1).collect()))
        .collect();
    let r = fault_simulate_parallel(c, &all, faults, sim)?;
    Ok(Some(
        r.first_detection
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_none())
            .map(|(i, _)| i)
            .collect(),
    ))
}

/// Runs the full pipeline.
pub fn run_frame(c: &Circuit, cfg: &RunConfig) -> Result<RunReport> {
    cfg.swarm.validate()?;
    cfg.power.validate()?;
    let caps = cfg.power.gate_capacitances(c)?;
    let sim = cfg.sim;

    let universe = enumerate_faults(c, cfg.collapse);
    if universe.is_empty() {
        return Err(Error::EmptyFaultList);
    }
    let untestable = untestable_faults(c, &universe, sim)?;
    let targets: Vec<Fault> = match &untestable {
        Some(u) => universe
            .iter()
            .enumerate()
            .filter(|(i, _)| !u.contains(i))
            .map(|(_, f)| *f)
            .collect(),
        None => universe.clone(),
    };
    let detectable = untestable.as_ref().map(|u| universe.len() - u.len());

    let population = init_population(c.width(), cfg.swarm.population_size, cfg.swarm.seed);
    let random_curve = if targets.is_empty() {
        vec![0.0; population.len()]
    } else {
        let r = fault_simulate_parallel(c, &population, &universe, sim)?;
        r.cumulative_coverage()
            .into_iter()
            .map(|x| 100.0 * x)
            .collect()
    };

    let memory = if targets.is_empty() {
        return Err(Error::EmptyFaultList);
    } else {
        pbest_phase(c, &population, &targets, &cfg.swarm, sim)?
    };
    let mem_vectors = memory.vectors();
    if mem_vectors.is_empty() {
        return Err(Error::EmptyMemory);
    }

    let frame = gbest_framing(c, &mem_vectors, &targets, &caps, &cfg.swarm, sim)?;
    let frame_cov = fault_simulate_parallel(c, &frame.vectors, &universe, sim)?;

    let memory_seq = simulate_sequence(c, &mem_vectors, sim.mode, &caps)?;
    let memory_hamming = adjacent_hamming(&mem_vectors)?;
    let (random_weighted, random_hamming) = random_order_baseline(c, &mem_vectors, &caps, cfg)?;

    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 1.0 };
    let frame_watts = estimate_power(frame.total_weighted_toggles, &cfg.power)?;
    let memory_watts = estimate_power(memory_seq.total_weighted, &cfg.power)?;
    let random_watts = estimate_power(random_weighted, &cfg.power)?;

    let exact = if cfg.exact_check && mem_vectors.len() <= EXACT_MAX {
        let e = exact_min_order(&mem_vectors)?;
        Some(ExactSection {
            exact_hamming: e.total_adjacent_hamming,
            frame_hamming: frame.total_adjacent_hamming,
            gap: frame.total_adjacent_hamming - e.total_adjacent_hamming,
            order: e.vectors,
        })
    } else {
        None
    };

    let total = universe.len();
    Ok(RunReport {
        circuit: CircuitStats::of(c),
        faults: FaultUniverse {
            count: total,
            collapsed: cfg.collapse,
            detectable,
            untestable: untestable
                .unwrap_or_default()
                .iter()
                .map(|&i| universe[i].describe(c))
                .collect(),
        },
        pbest: PbestSection {
            vectors: memory
                .entries
                .iter()
                .map(|e| PbestRow {
                    vector: e.particle.vector.clone(),
                    new_faults: e.new_faults.len(),
                    coverage: percent(e.cumulative_detected, total),
                    ff_activity: e.particle.ff_activity,
                    origin: e.origin,
                })
                .collect(),
            termination: memory.termination,
            candidates: memory.stats.candidates,
            mutants: memory.stats.mutants,
            coverage: percent(memory.detected(), total),
            detectable_coverage: percent(memory.detected(), targets.len()),
        },
        frame: FrameSection {
            strategy: frame.strategy,
            adjacent_hamming: frame.total_adjacent_hamming,
            weighted_toggles: frame.total_weighted_toggles,
            threshold_misses: frame.threshold_misses,
            refinement_moves: frame.refinement_moves,
            per_gate: c
                .gates()
                .iter()
                .zip(&frame.per_gate_toggles)
                .zip(&caps)
                .map(|((g, &t), &cap)| GateToggles {
                    gate: c.label(g.output).to_string(),
                    toggles: t,
                    capacitance: cap,
                })
                .collect(),
            coverage: percent(frame_cov.detected.len(), total),
            vectors: frame.vectors,
        },
        baseline: BaselineSection {
            memory_order_weighted: memory_seq.total_weighted,
            memory_order_hamming: memory_hamming,
            random_orders: cfg.baseline_seeds,
            random_mean_weighted: random_weighted,
            random_mean_hamming: random_hamming,
            ratio_vs_random: ratio(frame.total_weighted_toggles, random_weighted),
            ratio_vs_memory: ratio(frame.total_weighted_toggles, memory_seq.total_weighted),
        },
        power: PowerSection {
            frame_watts,
            memory_order_watts: memory_watts,
            random_mean_watts: random_watts,
            ratio_vs_random: ratio(frame_watts, random_watts),
        },
        exact,
        random_curve,
        config: cfg.clone(),
        generated_at_unix: None,
    })
}

/// Mean weighted toggles and mean adjacent Hamming over shuffled orders.
pub fn random_order_baseline(
    c: &Circuit,
    vectors: &[TestVector],
    caps: &[f64],
    cfg: &RunConfig,
) -> Result<(f64, f64)> {
    if cfg.baseline_seeds == 0 {
        return Ok((0.0, 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.swarm.seed);
    rng.set_stream(stream::BASELINE);
    let mut order = vectors.to_vec();
    let (mut w, mut h) = (0.0, 0.0);
    for _ in 0..cfg.baseline_seeds {
        order.clone_from_slice(vectors);
        order.shuffle(&mut rng);
        w += simulate_sequence(c, &order, cfg.sim.mode, caps)?.total_weighted;
        h += adjacent_hamming(&order)? as f64;
    }
    let k = cfg.baseline_seeds as f64;
    Ok((w / k, h / k))
}

/// Fault simulation of a fixed vector list, as reported by `fsim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsimReport {
    pub circuit: CircuitStats,
    pub faults: Vec<String>,
    pub collapsed: bool,
    pub sim: SimOptions,
    pub vectors: Vec<TestVector>,
    pub detection: DetectionReport,
}

impl FsimReport {
    pub fn run(
        c: &Circuit,
        vectors: Vec<TestVector>,
        collapse: bool,
        sim: SimOptions,
    ) -> Result<Self> {
        let faults = enumerate_faults(c, collapse);
        let detection = fault_simulate_parallel(c, &vectors, &faults, sim)?;
        Ok(Self {
            circuit: CircuitStats::of(c),
            faults: faults.iter().map(|f| f.describe(c)).collect(),
            collapsed: collapse,
            sim,
            vectors,
            detection,
        })
    }

    /// `vector,coverage` with cumulative percent coverage.
    pub fn coverage_csv(&self) -> String {
        let mut out = String::from("vector,coverage\n");
        for (v, cov) in self
            .vectors
            .iter()
            .zip(self.detection.cumulative_coverage())
        {
            let _ = writeln!(out, "{v},{:.3}", 100.0 * cov);
        }
        out
    }

    /// `fault_id,detected_by`; the vector index is empty for undetected faults.
    pub fn detections_csv(&self) -> String {
        let mut out = String::from("fault_id,detected_by\n");
        for (f, d) in self.detection.first_detection.iter().enumerate() {
            match d {
                Some(i) => {
                    let _ = writeln!(out, "{f},{i}");
                }
                None => {
                    let _ = writeln!(out, "{f},");
                }
            }
        }
        out
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{}: {} faults ({}), mode {}, observe {}",
            display_name(&self.circuit.name),
            self.faults.len(),
            if self.collapsed {
                "collapsed"
            } else {
                "uncollapsed"
            },
            self.sim.mode,
            self.sim.observe
        );
        vector_table(
            &mut out,
            "Fault simulation",
            self.vectors
                .iter()
                .zip(self.detection.cumulative_coverage())
                .map(|(v, c)| (v.to_string(), 100.0 * c)),
        );
        out
    }
}

fn display_name(name: &str) -> &str {
    if name.is_empty() {
        "circuit"
    } else {
        name
    }
}

fn vector_table(out: &mut String, title: &str, rows: impl Iterator<Item = (String, f64)>) {
    let _ = writeln!(out, "\n{title}");
    let _ = writeln!(
        out,
        "{:>5}  {:<20}  {:>14}",
        "S.No.", "Test vector", "Fault coverage"
    );
    for (i, (v, cov)) in rows.enumerate() {
        let _ = writeln!(out, "{:>5}  {:<20}  {:>14.1}", i + 1, v, cov);
    }
}

/// Renders a report as the plain-text tables printed by `report`.
pub fn render_tables(r: &RunReport) -> String {
    let mut out = String::new();
    let c = &r.circuit;
    let _ = writeln!(
        out,
        "{}: {} inputs, {} outputs, {} flip-flops, {} gates",
        display_name(&c.name),
        c.inputs,
        c.outputs,
        c.dffs,
        c.gates
    );
    let _ = write!(
        out,
        "Faults: {} ({})",
        r.faults.count,
        if r.faults.collapsed {
            "collapsed"
        } else {
            "uncollapsed"
        }
    );
    match r.faults.detectable {
        Some(d) => {
            let _ = writeln!(out, ", {d} detectable");
        }
        None => out.push('\n'),
    }
    let _ = writeln!(
        out,
        "Seed {}, population {}, mode {}, observe {}",
        r.config.swarm.seed,
        r.config.swarm.population_size,
        r.config.sim.mode,
        r.config.sim.observe
    );

    vector_table(
        &mut out,
        "Random population",
        r.random_curve
            .iter()
            .enumerate()
            .map(|(i, &cov)| (format!("#{}", i + 1), cov)),
    );
    vector_table(
        &mut out,
        "Vectors kept by pbest",
        r.pbest
            .vectors
            .iter()
            .map(|row| (row.vector.to_string(), row.coverage)),
    );

    let _ = writeln!(out, "\nFrame with least toggling");
    let n = r.frame.vectors.len();
    let vecs: Vec<String> = r
        .frame
        .vectors
        .iter()
        .rev()
        .map(|v| v.to_string())
        .collect();
    let slots: Vec<String> = (1..=n).rev().map(|t| format!("T{t}")).collect();
    let wid = vecs.iter().map(String::len).max().unwrap_or(2).max(3);
    let _ = writeln!(
        out,
        "{}",
        vecs.iter()
            .map(|v| format!("{v:<wid$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
    );
    let _ = writeln!(
        out,
        "{}",
        slots
            .iter()
            .map(|s| format!("{s:<wid$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
    );

    let b = &r.baseline;
    let _ = writeln!(out, "\nSwitching activity");
    let _ = writeln!(out, "{:<28}{:>14}{:>12}", "", "weighted", "hamming");
    let _ = writeln!(
        out,
        "{:<28}{:>14.3}{:>12}",
        "frame", r.frame.weighted_toggles, r.frame.adjacent_hamming
    );
    let _ = writeln!(
        out,
        "{:<28}{:>14.3}{:>12}",
        "memory order", b.memory_order_weighted, b.memory_order_hamming
    );
    let _ = writeln!(
        out,
        "{:<28}{:>14.3}{:>12.2}",
        format!("random mean ({} orders)", b.random_orders),
        b.random_mean_weighted,
        b.random_mean_hamming
    );
    let _ = writeln!(out, "frame / random ratio: {:.4}", b.ratio_vs_random);
    let _ = writeln!(out, "frame coverage: {:.1}", r.frame.coverage);
    if let Some(e) = &r.exact {
        let _ = writeln!(
            out,
            "exact minimum hamming: {} (frame {}, gap {})",
            e.exact_hamming, e.frame_hamming, e.gap
        );
    }

    let p = &r.power;
    let _ = writeln!(
        out,
        "\nPower ({} cap model)",
        r.config.power.cap_model.kind()
    );
    let _ = writeln!(out, "frame:        {:.6e} W", p.frame_watts);
    let _ = writeln!(out, "memory order: {:.6e} W", p.memory_order_watts);
    let _ = writeln!(out, "random mean:  {:.6e} W", p.random_mean_watts);
    let _ = writeln!(out, "ratio:        {:.4}", p.ratio_vs_random);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{parse_bench, S27_BENCH};

    fn s27() -> Circuit {
        parse_bench(S27_BENCH).unwrap().with_name("s27")
    }

    #[test]
    fn s27_has_no_untestable_collapsed_faults() {
        let c = s27();
        let f = enumerate_faults(&c, true);
        assert_eq!(
            untestable_faults(&c, &f, SimOptions::default()).unwrap(),
            Some(vec![])
        );
        let func = SimOptions {
            mode: SimMode::Functional,
            ..Default::default()
        };
        assert_eq!(untestable_faults(&c, &f, func).unwrap(), None);
    }

    #[test]
    fn run_is_deterministic_and_round_trips() {
        let c = s27();
        let cfg = RunConfig {
            collapse: true,
            exact_check: true,
            ..Default::default()
        };
        let a = run_frame(&c, &cfg).unwrap();
        let b = run_frame(&c, &cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let back = RunReport::from_json(&a.to_json()).unwrap();
        assert_eq!(render_tables(&back), render_tables(&a));
        assert_eq!(a.frame.vectors.len(), a.pbest.vectors.len());
        assert_eq!(a.frame.coverage, a.pbest.coverage);
    }

    #[test]
    fn fsim_csvs() {
        let c = s27();
        let v: Vec<TestVector> = ["1110010", "1001101"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let r = FsimReport::run(&c, v, true, SimOptions::default()).unwrap();
        let cov = r.coverage_csv();
        assert!(cov.starts_with("vector,coverage\n1110010,"));
        assert_eq!(r.detections_csv().lines().count(), 33);
    }
}
