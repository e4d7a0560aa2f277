use serde::{Deserialize, Serialize};

use super::{check_width, eval_nets, Fault, Observe, SimMode, SimOptions, TestVector};
use crate::error::{Error, Result};
use crate::netlist::Circuit;

/// Which faults a vector list detects, and which vector detected each first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub total_faults: usize,
    /// Indices into the simulated fault list, ascending.
    pub detected: Vec<usize>,
    /// Faults first detected by each applied vector.
    pub per_vector: Vec<Vec<usize>>,
    /// Index of the first detecting vector per fault.
    pub first_detection: Vec<Option<usize>>,
}

impl DetectionReport {
    pub(crate) fn from_first_detection(num_vectors: usize, first: Vec<Option<usize>>) -> Self {
        let mut per_vector = vec![Vec::new(); num_vectors];
        let mut detected = Vec::new();
        for (f, d) in first.iter().enumerate() {
            if let Some(i) = *d {
                per_vector[i].push(f);
                detected.push(f);
            }
        }
        Self {
            total_faults: first.len(),
            detected,
            per_vector,
            first_detection: first,
        }
    }

    pub fn coverage(&self) -> Result<f64> {
        coverage(self)
    }

    /// Coverage after each applied vector, in order.
    pub fn cumulative_coverage(&self) -> Vec<f64> {
        let mut acc = 0usize;
        self.per_vector
            .iter()
            .map(|v| {
                acc += v.len();
                acc as f64 / self.total_faults.max(1) as f64
            })
            .collect()
    }
}

/// Detected fraction of the fault list.
pub fn coverage(r: &DetectionReport) -> Result<f64> {
    if r.total_faults == 0 {
        return Err(Error::ZeroFaults);
    }
    Ok(r.detected.len() as f64 / r.total_faults as f64)
}

pub(crate) fn check_inputs(c: &Circuit, vectors: &[TestVector], faults: &[Fault]) -> Result<()> {
    if faults.is_empty() {
        return Err(Error::EmptyFaultList);
    }
    if vectors.is_empty() {
        return Err(Error::EmptyVectorList);
    }
    vectors.iter().try_for_each(|v| check_width(c, v))
}

/// Values observed after one step: primary outputs, then flip-flop data pins.
/// The data-pin part doubles as the next state.
struct Observed {
    po: Vec<bool>,
    data: Vec<bool>,
}

impl Observed {
    fn differs(&self, other: &Observed, observe: Observe) -> bool {
        self.po != other.po || (observe == Observe::Scan && self.data != other.data)
    }
}

fn good_step(c: &Circuit, pis: &[bool], state: &[bool], nets: &mut [bool]) -> Observed {
    eval_nets(c, pis, state, nets);
    Observed {
        po: c.outputs().iter().map(|&n| nets[n]).collect(),
        data: c.dffs().iter().map(|d| nets[d.data]).collect(),
    }
}

/// Evaluation with one fault injected. Stem faults override the net after it
/// is driven; branch faults override only the value seen by one sink.
fn faulty_step(
    c: &Circuit,
    fault: &Fault,
    pis: &[bool],
    state: &[bool],
    nets: &mut [bool],
) -> Observed {
    let stuck = fault.polarity.value();
    let stem = fault.site.sink.is_none().then_some(fault.site.net);
    let branch = fault.sink_id(c);
    let force = |n: usize, v: bool| if stem == Some(n) { stuck } else { v };
    let read = |nets: &[bool], n: usize, sink: usize| {
        if branch == Some(sink) {
            stuck
        } else {
            nets[n]
        }
    };

    for (&n, &b) in c.inputs().iter().zip(pis) {
        nets[n] = force(n, b);
    }
    for (d, &b) in c.dffs().iter().zip(state) {
        nets[d.state] = force(d.state, b);
    }
    for &g in c.order() {
        let gate = &c.gates()[g];
        let pins = c.pin_sink_ids(g);
        let v = gate.kind.eval(
            gate.inputs
                .iter()
                .zip(pins)
                .map(|(&n, &s)| read(nets, n, s)),
        );
        nets[gate.output] = force(gate.output, v);
    }
    Observed {
        po: c
            .outputs()
            .iter()
            .zip(c.output_sink_ids())
            .map(|(&n, &s)| read(nets, n, s))
            .collect(),
        data: c
            .dffs()
            .iter()
            .zip(c.dff_sink_ids())
            .map(|(d, &s)| read(nets, d.data, s))
            .collect(),
    }
}

/// Reference fault simulator: one fault, one vector at a time.
pub fn fault_simulate_serial(
    c: &Circuit,
    vectors: &[TestVector],
    faults: &[Fault],
    opts: SimOptions,
) -> Result<DetectionReport> {
    serial(c, vectors, faults, opts, true)
}

/// Same as [`fault_simulate_serial`] but keeps simulating detected faults.
pub fn fault_simulate_serial_undropped(
    c: &Circuit,
    vectors: &[TestVector],
    faults: &[Fault],
    opts: SimOptions,
) -> Result<DetectionReport> {
    serial(c, vectors, faults, opts, false)
}

fn serial(
    c: &Circuit,
    vectors: &[TestVector],
    faults: &[Fault],
    opts: SimOptions,
    dropping: bool,
) -> Result<DetectionReport> {
    check_inputs(c, vectors, faults)?;
    let ni = c.inputs().len();
    let mut nets = vec![false; c.num_nets()];

    let mut good = Vec::with_capacity(vectors.len());
    let mut state = vectors[0].bits()[ni..].to_vec();
    for v in vectors {
        if opts.mode == SimMode::Scan {
            state = v.bits()[ni..].to_vec();
        }
        let obs = good_step(c, &v.bits()[..ni], &state, &mut nets);
        state = obs.data.clone();
        good.push(obs);
    }

    let mut first = vec![None; faults.len()];
    for (fi, fault) in faults.iter().enumerate() {
        let mut state = vectors[0].bits()[ni..].to_vec();
        for (i, v) in vectors.iter().enumerate() {
            if opts.mode == SimMode::Scan {
                state = v.bits()[ni..].to_vec();
            }
            let obs = faulty_step(c, fault, &v.bits()[..ni], &state, &mut nets);
            if first[fi].is_none() && obs.differs(&good[i], opts.observe) {
                first[fi] = Some(i);
                if dropping {
                    break;
                }
            }
            state = obs.data;
        }
    }
    Ok(DetectionReport::from_first_detection(vectors.len(), first))
}
