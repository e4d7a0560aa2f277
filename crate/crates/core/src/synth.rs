//! Seeded random netlists for property tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::netlist::{Circuit, CircuitBuilder, GateKind};

#[derive(Debug, Clone, Copy)]
pub struct RandomCircuitSpec {
    pub inputs: usize,
    pub dffs: usize,
    pub gates: usize,
    pub outputs: usize,
    pub max_fanin: usize,
}

impl Default for RandomCircuitSpec {
    fn default() -> Self {
        Self {
            inputs: 4,
            dffs: 3,
            gates: 20,
            outputs: 2,
            max_fanin: 3,
        }
    }
}

/// Builds an acyclic random netlist. Gates only read earlier nets, so the
/// combinational part is a DAG; flip-flops sample arbitrary nets.
pub fn random_circuit(spec: RandomCircuitSpec, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = CircuitBuilder::new(format!("rand{seed}"));
    let inputs = spec.inputs.max(if spec.dffs == 0 { 1 } else { 0 });
    let gates = spec.gates.max(1);

    let mut sources: Vec<String> = Vec::new();
    for i in 0..inputs {
        let l = format!("i{i}");
        b.input(&l).expect("fresh label");
        sources.push(l);
    }
    let states: Vec<String> = (0..spec.dffs).map(|i| format!("q{i}")).collect();
    sources.extend(states.iter().cloned());

    let mut outs = Vec::with_capacity(gates);
    for g in 0..gates {
        let kind = GateKind::ALL[rng.random_range(0..GateKind::ALL.len())];
        let arity = if kind.is_unary() {
            1
        } else {
            rng.random_range(2..=spec.max_fanin.max(2))
        };
        let ins: Vec<String> = (0..arity)
            .map(|_| sources[rng.random_range(0..sources.len())].clone())
            .collect();
        let refs: Vec<&str> = ins.iter().map(String::as_str).collect();
        let out = format!("g{g}");
        b.gate(&out, kind, &refs).expect("fresh label");
        sources.push(out.clone());
        outs.push(out);
    }

    for q in &states {
        let d = &outs[rng.random_range(0..outs.len())];
        b.dff(q, d).expect("fresh label");
    }
    // The last gate is always observed so the deepest logic is testable.
    b.output(&outs[gates - 1]);
    for _ in 1..spec.outputs.max(1) {
        let o = &outs[rng.random_range(0..outs.len())];
        b.output(o);
    }
    b.build().expect("generator produces valid circuits")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        for seed in 0..20 {
            let spec = RandomCircuitSpec {
                gates: 30,
                ..Default::default()
            };
            let c = random_circuit(spec, seed);
            assert_eq!(c.gates().len(), 30);
            assert_eq!(c.dffs().len(), 3);
            assert_eq!(c.order().len(), 30);
        }
    }

    #[test]
    fn combinational_without_inputs_still_has_width() {
        let c = random_circuit(
            RandomCircuitSpec {
                inputs: 0,
                dffs: 0,
                ..Default::default()
            },
            1,
        );
        assert_eq!(c.width(), 1);
    }
}
