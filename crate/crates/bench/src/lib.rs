//! Shared inputs for the criterion benchmarks in `benches/`.

use psoframe::swarm::init_population;
use psoframe::synth::{random_circuit, RandomCircuitSpec};
use psoframe::{parse_bench, Circuit, TestVector, S27_BENCH};

pub fn s27() -> Circuit {
    parse_bench(S27_BENCH).expect("bundled fixture parses")
}

/// A mid-sized random netlist, larger than s27.
pub fn medium() -> Circuit {
    random_circuit(
        RandomCircuitSpec {
            inputs: 12,
            dffs: 8,
            gates: 300,
            outputs: 8,
            max_fanin: 3,
        },
        1,
    )
}

pub fn vectors(c: &Circuit, n: usize) -> Vec<TestVector> {
    init_population(c.width(), n, 99)
}
