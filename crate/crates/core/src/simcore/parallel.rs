//! Word-parallel fault simulation.
//!
//! Scan mode packs up to 64 patterns per word and simulates one fault at a
//! time against them. Functional mode cannot pack patterns (each step
//! depends on the previous state), so it packs up to 64 faulty machines per
//! word instead and walks the sequence once per group. Faults are spread
//! over threads and merged back in fault-index order.

use rayon::prelude::*;

use super::fsim::check_inputs;
use super::{DetectionReport, Fault, Observe, SimMode, SimOptions, TestVector};
use crate::error::Result;
use crate::netlist::Circuit;

const LANES: usize = 64;

/// Per-lane stuck-at overrides. `force` selects lanes, `value` gives the
/// stuck value in those lanes.
struct Injection {
    stem_force: Vec<u64>,
    stem_value: Vec<u64>,
    sink_force: Vec<u64>,
    sink_value: Vec<u64>,
}

impl Injection {
    fn new(c: &Circuit) -> Self {
        Self {
            stem_force: vec![0; c.num_nets()],
            stem_value: vec![0; c.num_nets()],
            sink_force: vec![0; c.total_sinks()],
            sink_value: vec![0; c.total_sinks()],
        }
    }

    fn set(&mut self, c: &Circuit, f: &Fault, lanes: u64) {
        let v = if f.polarity.value() { lanes } else { 0 };
        match f.sink_id(c) {
            None => {
                self.stem_force[f.site.net] |= lanes;
                self.stem_value[f.site.net] |= v;
            }
            Some(s) => {
                self.sink_force[s] |= lanes;
                self.sink_value[s] |= v;
            }
        }
    }

    fn clear(&mut self, c: &Circuit, f: &Fault) {
        match f.sink_id(c) {
            None => {
                self.stem_force[f.site.net] = 0;
                self.stem_value[f.site.net] = 0;
            }
            Some(s) => {
                self.sink_force[s] = 0;
                self.sink_value[s] = 0;
            }
        }
    }

    #[inline]
    fn stem(&self, n: usize, w: u64) -> u64 {
        (w & !self.stem_force[n]) | (self.stem_value[n] & self.stem_force[n])
    }

    #[inline]
    fn sink(&self, s: usize, w: u64) -> u64 {
        (w & !self.sink_force[s]) | (self.sink_value[s] & self.sink_force[s])
    }
}

fn eval_words(c: &Circuit, pis: &[u64], state: &[u64], inj: &Injection, nets: &mut [u64]) {
    for (&n, &w) in c.inputs().iter().zip(pis) {
        nets[n] = inj.stem(n, w);
    }
    for (d, &w) in c.dffs().iter().zip(state) {
        nets[d.state] = inj.stem(d.state, w);
    }
    for &g in c.order() {
        let gate = &c.gates()[g];
        let pins = c.pin_sink_ids(g);
        let w = gate.kind.eval_word(
            gate.inputs
                .iter()
                .zip(pins)
                .map(|(&n, &s)| inj.sink(s, nets[n])),
        );
        nets[gate.output] = inj.stem(gate.output, w);
    }
}

/// Observed words: primary outputs then flip-flop data pins.
fn observe_words(c: &Circuit, inj: &Injection, nets: &[u64], out: &mut Vec<u64>) {
    out.clear();
    out.extend(
        c.outputs()
            .iter()
            .zip(c.output_sink_ids())
            .map(|(&n, &s)| inj.sink(s, nets[n])),
    );
    out.extend(
        c.dffs()
            .iter()
            .zip(c.dff_sink_ids())
            .map(|(d, &s)| inj.sink(s, nets[d.data])),
    );
}

fn observed_len(c: &Circuit, observe: Observe) -> usize {
    match observe {
        Observe::Scan => c.outputs().len() + c.dffs().len(),
        Observe::PoOnly => c.outputs().len(),
    }
}

/// Word-parallel equivalent of [`super::fault_simulate_serial`].
pub fn fault_simulate_parallel(
    c: &Circuit,
    vectors: &[TestVector],
    faults: &[Fault],
    opts: SimOptions,
) -> Result<DetectionReport> {
    check_inputs(c, vectors, faults)?;
    let first = match opts.mode {
        SimMode::Scan => pattern_parallel(c, vectors, faults, opts.observe),
        SimMode::Functional => fault_parallel(c, vectors, faults, opts.observe),
    };
    Ok(DetectionReport::from_first_detection(vectors.len(), first))
}

struct PatternChunk {
    pis: Vec<u64>,
    state: Vec<u64>,
    valid: u64,
    good: Vec<u64>,
}

fn pattern_parallel(
    c: &Circuit,
    vectors: &[TestVector],
    faults: &[Fault],
    observe: Observe,
) -> Vec<Option<usize>> {
    let ni = c.inputs().len();
    let nobs = observed_len(c, observe);
    let clean = Injection::new(c);
    let mut nets = vec![0u64; c.num_nets()];

    let chunks: Vec<PatternChunk> = vectors
        .chunks(LANES)
        .map(|chunk| {
            let mut words = vec![0u64; c.width()];
            for (lane, v) in chunk.iter().enumerate() {
                for (bit, w) in v.bits().iter().zip(words.iter_mut()) {
                    *w |= u64::from(*bit) << lane;
                }
            }
            let valid = if chunk.len() == LANES {
                !0
            } else {
                (1u64 << chunk.len()) - 1
            };
            let state = words.split_off(ni);
            let mut good = Vec::new();
            eval_words(c, &words, &state, &clean, &mut nets);
            observe_words(c, &clean, &nets, &mut good);
            good.truncate(nobs);
            PatternChunk {
                pis: words,
                state,
                valid,
                good,
            }
        })
        .collect();

    faults
        .par_iter()
        .map_init(
            || (Injection::new(c), vec![0u64; c.num_nets()], Vec::new()),
            |(inj, nets, obs), f| {
                inj.set(c, f, !0);
                let mut hit = None;
                for (ci, ch) in chunks.iter().enumerate() {
                    eval_words(c, &ch.pis, &ch.state, inj, nets);
                    observe_words(c, inj, nets, obs);
                    let diff = obs
                        .iter()
                        .zip(&ch.good)
                        .fold(0u64, |acc, (a, b)| acc | (a ^ b))
                        & ch.valid;
                    if diff != 0 {
                        hit = Some(ci * LANES + diff.trailing_zeros() as usize);
                        break;
                    }
                }
                inj.clear(c, f);
                hit
            },
        )
        .collect()
}

fn broadcast(b: bool) -> u64 {
    if b {
        !0
    } else {
        0
    }
}

fn fault_parallel(
    c: &Circuit,
    vectors: &[TestVector],
    faults: &[Fault],
    observe: Observe,
) -> Vec<Option<usize>> {
    let ni = c.inputs().len();
    let nobs = observed_len(c, observe);
    let clean = Injection::new(c);

    // Fault-free observations per step, broadcast to all lanes.
    let mut good: Vec<Vec<u64>> = Vec::with_capacity(vectors.len());
    {
        let mut nets = vec![0u64; c.num_nets()];
        let mut state: Vec<u64> = vectors[0].bits()[ni..]
            .iter()
            .map(|&b| broadcast(b))
            .collect();
        for v in vectors {
            let pis: Vec<u64> = v.bits()[..ni].iter().map(|&b| broadcast(b)).collect();
            let mut obs = Vec::new();
            eval_words(c, &pis, &state, &clean, &mut nets);
            observe_words(c, &clean, &nets, &mut obs);
            state = obs[c.outputs().len()..].to_vec();
            obs.truncate(nobs);
            good.push(obs);
        }
    }

    let groups: Vec<&[Fault]> = faults.chunks(LANES).collect();
    let results: Vec<Vec<Option<usize>>> = groups
        .par_iter()
        .map(|group| {
            let mut inj = Injection::new(c);
            for (lane, f) in group.iter().enumerate() {
                inj.set(c, f, 1u64 << lane);
            }
            let all = if group.len() == LANES {
                !0
            } else {
                (1u64 << group.len()) - 1
            };
            let mut first = vec![None; group.len()];
            let mut detected = 0u64;
            let mut nets = vec![0u64; c.num_nets()];
            let mut obs = Vec::new();
            let mut state: Vec<u64> = vectors[0].bits()[ni..]
                .iter()
                .map(|&b| broadcast(b))
                .collect();
            for (i, v) in vectors.iter().enumerate() {
                let pis: Vec<u64> = v.bits()[..ni].iter().map(|&b| broadcast(b)).collect();
                eval_words(c, &pis, &state, &inj, &mut nets);
                observe_words(c, &inj, &nets, &mut obs);
                let diff = obs[..nobs]
                    .iter()
                    .zip(&good[i])
                    .fold(0u64, |acc, (a, b)| acc | (a ^ b));
                let mut fresh = diff & all & !detected;
                detected |= fresh;
                while fresh != 0 {
                    let lane = fresh.trailing_zeros() as usize;
                    first[lane] = Some(i);
                    fresh &= fresh - 1;
                }
                if detected == all {
                    break;
                }
                state.clear();
                state.extend_from_slice(&obs[c.outputs().len()..]);
            }
            first
        })
        .collect();
    results.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{parse_bench, S27_BENCH};
    use crate::simcore::{enumerate_faults, fault_simulate_serial};

    fn tv(s: &str) -> TestVector {
        s.parse().unwrap()
    }

    #[test]
    fn single_vector_packing() {
        let c = parse_bench(S27_BENCH).unwrap();
        let faults = enumerate_faults(&c, true);
        let v = [tv("1110010")];
        for mode in [SimMode::Scan, SimMode::Functional] {
            let o = SimOptions {
                mode,
                ..Default::default()
            };
            assert_eq!(
                fault_simulate_parallel(&c, &v, &faults, o).unwrap(),
                fault_simulate_serial(&c, &v, &faults, o).unwrap()
            );
        }
    }

    #[test]
    fn spans_several_chunks() {
        let c = parse_bench(S27_BENCH).unwrap();
        let faults = enumerate_faults(&c, false);
        // mostly-constant prefix so some detections land in later chunks
        let mut vs: Vec<TestVector> = (0..150).map(|_| tv("0000000")).collect();
        vs[70] = tv("1011010");
        vs[140] = tv("0101101");
        for mode in [SimMode::Scan, SimMode::Functional] {
            let o = SimOptions {
                mode,
                ..Default::default()
            };
            assert_eq!(
                fault_simulate_parallel(&c, &vs, &faults, o).unwrap(),
                fault_simulate_serial(&c, &vs, &faults, o).unwrap()
            );
        }
    }
}
