//! Two-valued logic simulation with toggle accounting, plus single stuck-at
//! fault simulation.
//!
//! Flip-flop states are pseudo-primary inputs: in [`SimMode::Scan`] every
//! vector forces them directly, in [`SimMode::Functional`] they follow the
//! previous step's next state and only the first vector seeds them.

mod fault;
mod fsim;
mod parallel;
mod vector;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::Circuit;

pub use fault::{enumerate_faults, Fault, FaultSite, Polarity};
pub use fsim::{coverage, fault_simulate_serial, fault_simulate_serial_undropped, DetectionReport};
pub use parallel::fault_simulate_parallel;
pub use vector::TestVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    #[default]
    Scan,
    Functional,
}

/// Which points are compared against the fault-free machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observe {
    /// Primary outputs and flip-flop data inputs.
    #[default]
    Scan,
    PoOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimOptions {
    pub mode: SimMode,
    pub observe: Observe,
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimMode::Scan => "scan",
            SimMode::Functional => "functional",
        })
    }
}

impl FromStr for SimMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "scan" => Ok(SimMode::Scan),
            "functional" => Ok(SimMode::Functional),
            _ => Err(format!("unknown mode `{s}` (expected scan or functional)")),
        }
    }
}

impl fmt::Display for Observe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Observe::Scan => "scan",
            Observe::PoOnly => "po-only",
        })
    }
}

impl FromStr for Observe {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "scan" => Ok(Observe::Scan),
            "po-only" => Ok(Observe::PoOnly),
            _ => Err(format!(
                "unknown observability `{s}` (expected scan or po-only)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepResult {
    pub po_values: Vec<bool>,
    pub next_state: Vec<bool>,
    pub net_values: Vec<bool>,
    /// 1 where the gate output changed against the previous step.
    pub toggles: Vec<u32>,
}

/// Cumulative switching over an applied sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceResult {
    pub steps: usize,
    pub cumulative_toggles: Vec<u32>,
    /// Σ toggles(g) · C(g) over all gates.
    pub total_weighted: f64,
    pub last: StepResult,
}

impl SequenceResult {
    pub fn total_toggles(&self) -> u64 {
        self.cumulative_toggles.iter().map(|&t| u64::from(t)).sum()
    }
}

pub(crate) fn check_width(c: &Circuit, v: &TestVector) -> Result<()> {
    if v.width() != c.width() {
        return Err(Error::WidthMismatch {
            expected: c.width(),
            found: v.width(),
        });
    }
    Ok(())
}

/// Fault-free evaluation of all nets from primary-input and state values.
pub(crate) fn eval_nets(c: &Circuit, pis: &[bool], state: &[bool], nets: &mut [bool]) {
    for (&n, &b) in c.inputs().iter().zip(pis) {
        nets[n] = b;
    }
    for (d, &b) in c.dffs().iter().zip(state) {
        nets[d.state] = b;
    }
    for &g in c.order() {
        let gate = &c.gates()[g];
        nets[gate.output] = gate.kind.eval(gate.inputs.iter().map(|&n| nets[n]));
    }
}

/// Applies one vector.
pub fn simulate_step(
    c: &Circuit,
    v: &TestVector,
    mode: SimMode,
    prev: Option<&StepResult>,
) -> Result<StepResult> {
    check_width(c, v)?;
    let ni = c.inputs().len();
    let bits = v.bits();
    let state: &[bool] = match (mode, prev) {
        (SimMode::Functional, Some(p)) => &p.next_state,
        _ => &bits[ni..],
    };
    let mut net_values = vec![false; c.num_nets()];
    eval_nets(c, &bits[..ni], state, &mut net_values);

    let toggles = match prev {
        Some(p) => c
            .gates()
            .iter()
            .map(|g| u32::from(p.net_values[g.output] != net_values[g.output]))
            .collect(),
        None => vec![0; c.gates().len()],
    };
    Ok(StepResult {
        po_values: c.outputs().iter().map(|&n| net_values[n]).collect(),
        next_state: c.dffs().iter().map(|d| net_values[d.data]).collect(),
        net_values,
        toggles,
    })
}

/// Applies `vectors` at consecutive periods and accumulates gate toggles
/// weighted by `caps` (one capacitance per gate).
pub fn simulate_sequence(
    c: &Circuit,
    vectors: &[TestVector],
    mode: SimMode,
    caps: &[f64],
) -> Result<SequenceResult> {
    if vectors.is_empty() {
        return Err(Error::EmptyFrame);
    }
    if caps.len() != c.gates().len() {
        return Err(Error::LengthMismatch(caps.len(), c.gates().len()));
    }
    let mut cumulative = vec![0u32; c.gates().len()];
    let mut prev: Option<StepResult> = None;
    for v in vectors {
        let step = simulate_step(c, v, mode, prev.as_ref())?;
        for (acc, t) in cumulative.iter_mut().zip(&step.toggles) {
            *acc += t;
        }
        prev = Some(step);
    }
    let total_weighted = cumulative
        .iter()
        .zip(caps)
        .map(|(&t, &cap)| f64::from(t) * cap)
        .sum();
    Ok(SequenceResult {
        steps: vectors.len(),
        cumulative_toggles: cumulative,
        total_weighted,
        last: prev.expect("non-empty"),
    })
}

/// Weighted toggles caused by moving from `prev` to the step applying `v`.
pub fn incremental_weighted_toggles(
    c: &Circuit,
    prev: &StepResult,
    v: &TestVector,
    mode: SimMode,
    caps: &[f64],
) -> Result<(f64, StepResult)> {
    let step = simulate_step(c, v, mode, Some(prev))?;
    let w = step
        .toggles
        .iter()
        .zip(caps)
        .map(|(&t, &cap)| f64::from(t) * cap)
        .sum();
    Ok((w, step))
}
