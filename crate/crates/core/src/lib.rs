//! Low-power test framing for gate-level sequential circuits.
//!
//! The pipeline parses an ISCAS-89 netlist ([`netlist`]), builds a single
//! stuck-at fault universe and simulates it ([`simcore`]), selects a compact
//! high-coverage vector set and orders it into a low-toggle frame
//! ([`swarm`]), and estimates dynamic power from the frame's switching
//! activity ([`power`]). [`report`] ties the stages together.

pub mod error;
pub mod netlist;
pub mod power;
pub mod report;
pub mod simcore;
pub mod swarm;
pub mod synth;

pub use error::{Error, Result};
pub use netlist::{parse_bench, Circuit, Gate, GateKind, NetId, S27_BENCH};
pub use power::{adjacent_hamming, estimate_power, CapModel, PowerModel};
pub use report::{run_frame, RunConfig, RunReport};
pub use simcore::{
    enumerate_faults, fault_simulate_parallel, fault_simulate_serial, DetectionReport, Fault,
    Observe, SimMode, SimOptions, TestVector,
};
pub use swarm::{gbest_framing, pbest_phase, Frame, PbestMemory, SwarmConfig};
