use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::netlist::{Circuit, GateKind, NetId, Sink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    StuckAt0,
    StuckAt1,
}

impl Polarity {
    pub fn value(self) -> bool {
        matches!(self, Polarity::StuckAt1)
    }

    pub fn from_value(v: bool) -> Self {
        if v {
            Polarity::StuckAt1
        } else {
            Polarity::StuckAt0
        }
    }
}

/// A stem (`sink == None`) or a single fanout branch of a net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaultSite {
    pub net: NetId,
    pub sink: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fault {
    pub site: FaultSite,
    pub polarity: Polarity,
}

impl Fault {
    pub fn stem(net: NetId, polarity: Polarity) -> Self {
        Self {
            site: FaultSite { net, sink: None },
            polarity,
        }
    }

    pub fn branch(net: NetId, sink: usize, polarity: Polarity) -> Self {
        Self {
            site: FaultSite {
                net,
                sink: Some(sink),
            },
            polarity,
        }
    }

    /// Flat sink id of a branch fault.
    pub(crate) fn sink_id(&self, c: &Circuit) -> Option<usize> {
        self.site.sink.map(|k| c.sink_id(self.site.net, k))
    }

    /// Label such as `G14/0` (stem) or `G14>G8.0/1` (branch into pin 0 of G8).
    pub fn describe(&self, c: &Circuit) -> String {
        let v = u8::from(self.polarity.value());
        let net = c.label(self.site.net);
        match self.site.sink {
            None => format!("{net}/{v}"),
            Some(k) => {
                let dest = match c.sinks(self.site.net)[k] {
                    Sink::GatePin { gate, pin } => {
                        format!("{}.{pin}", c.label(c.gates()[gate].output))
                    }
                    Sink::DffData(i) => format!("{}.D", c.label(c.dffs()[i].state)),
                    Sink::Output(i) => format!("PO{i}"),
                };
                format!("{net}>{dest}/{v}")
            }
        }
    }
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = u8::from(self.polarity.value());
        match self.site.sink {
            None => write!(f, "n{}/{v}", self.site.net),
            Some(k) => write!(f, "n{}.{k}/{v}", self.site.net),
        }
    }
}

/// Single stuck-at faults on every stem, and on every branch of nets with
/// two or more sinks (a lone branch is the stem). With `collapse`, faults
/// that are structurally equivalent through a single gate are merged and
/// the lowest-indexed member of each class is kept.
pub fn enumerate_faults(c: &Circuit, collapse: bool) -> Vec<Fault> {
    let mut all = Vec::new();
    for net in 0..c.num_nets() {
        for p in [Polarity::StuckAt0, Polarity::StuckAt1] {
            all.push(Fault::stem(net, p));
        }
        let fanout = c.sinks(net).len();
        if fanout > 1 {
            for k in 0..fanout {
                for p in [Polarity::StuckAt0, Polarity::StuckAt1] {
                    all.push(Fault::branch(net, k, p));
                }
            }
        }
    }
    if !collapse {
        return all;
    }

    let index: HashMap<Fault, usize> = all.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let mut parent: Vec<usize> = (0..all.len()).collect();

    // The fault seen by a gate pin: the branch when the net fans out, else the stem.
    let pin_fault = |net: NetId, gate: usize, pin: usize, v: bool| {
        let sinks = c.sinks(net);
        let f = if sinks.len() > 1 {
            let k = sinks
                .iter()
                .position(|s| *s == Sink::GatePin { gate, pin })
                .expect("pin is a sink of its net");
            Fault::branch(net, k, Polarity::from_value(v))
        } else {
            Fault::stem(net, Polarity::from_value(v))
        };
        index[&f]
    };

    for (g, gate) in c.gates().iter().enumerate() {
        let out = |v: bool| index[&Fault::stem(gate.output, Polarity::from_value(v))];
        let inv = gate.kind.is_inverting();
        let unary = gate.inputs.len() == 1 && !matches!(gate.kind, GateKind::Xor | GateKind::Xnor);
        for (pin, &net) in gate.inputs.iter().enumerate() {
            if unary {
                for v in [false, true] {
                    union(&mut parent, pin_fault(net, g, pin, v), out(v ^ inv));
                }
            } else if let Some(cv) = gate.kind.controlling_value() {
                union(&mut parent, pin_fault(net, g, pin, cv), out(cv ^ inv));
            }
        }
    }

    (0..all.len())
        .filter(|&i| find(&mut parent, i) == i)
        .map(|i| all[i])
        .collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Union keeping the smaller index as root, so roots are class minima.
fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}
