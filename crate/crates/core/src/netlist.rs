//! Gate-level sequential netlists in ISCAS-89 `.bench` syntax.
//!
//! A [`Circuit`] is immutable once built. Nets are dense indices assigned in
//! first-appearance order; every net has exactly one driver (a primary input,
//! a flip-flop state output, or a gate) and an ordered list of sinks. The sink
//! order is fixed (gate pins by gate then pin, then flip-flop data pins, then
//! primary outputs) because branch faults address sinks by position.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NetId = usize;
pub type GateId = usize;

/// The standard ISCAS-89 s27 benchmark.
pub const S27_BENCH: &str = include_str!("../../../fixtures/s27.bench");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And,
    Nand,
    Or,
    Nor,
    Not,
    Buf,
    Xor,
    Xnor,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::And,
        GateKind::Nand,
        GateKind::Or,
        GateKind::Nor,
        GateKind::Not,
        GateKind::Buf,
        GateKind::Xor,
        GateKind::Xnor,
    ];

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.keyword().eq_ignore_ascii_case(s))
    }

    pub fn keyword(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Nand => "NAND",
            GateKind::Or => "OR",
            GateKind::Nor => "NOR",
            GateKind::Not => "NOT",
            GateKind::Buf => "BUFF",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
        }
    }

    pub fn is_unary(self) -> bool {
        matches!(self, GateKind::Not | GateKind::Buf)
    }

    /// Whether the output is complemented relative to the base function.
    pub fn is_inverting(self) -> bool {
        matches!(
            self,
            GateKind::Nand | GateKind::Nor | GateKind::Not | GateKind::Xnor
        )
    }

    /// Input value that alone determines the output, if the gate has one.
    pub fn controlling_value(self) -> Option<bool> {
        match self {
            GateKind::And | GateKind::Nand => Some(false),
            GateKind::Or | GateKind::Nor => Some(true),
            _ => None,
        }
    }

    pub fn eval(self, inputs: impl IntoIterator<Item = bool>) -> bool {
        let mut it = inputs.into_iter();
        let base = match self {
            GateKind::And | GateKind::Nand => it.all(|b| b),
            GateKind::Or | GateKind::Nor => it.any(|b| b),
            GateKind::Not | GateKind::Buf => it.next().unwrap_or(false),
            GateKind::Xor | GateKind::Xnor => it.fold(false, |acc, b| acc ^ b),
        };
        base ^ self.is_inverting()
    }

    /// Bitwise evaluation over 64 independent lanes.
    pub fn eval_word(self, inputs: impl IntoIterator<Item = u64>) -> u64 {
        let it = inputs.into_iter();
        let base = match self {
            GateKind::And | GateKind::Nand => it.fold(!0u64, |acc, w| acc & w),
            GateKind::Or | GateKind::Nor => it.fold(0u64, |acc, w| acc | w),
            GateKind::Not | GateKind::Buf => it.fold(0u64, |_, w| w),
            GateKind::Xor | GateKind::Xnor => it.fold(0u64, |acc, w| acc ^ w),
        };
        if self.is_inverting() {
            !base
        } else {
            base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub output: NetId,
    pub kind: GateKind,
    pub inputs: Vec<NetId>,
    /// Number of sinks fed by the output net.
    pub load_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dff {
    /// Net carrying the flip-flop's present state.
    pub state: NetId,
    /// Net sampled as the next state.
    pub data: NetId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Input(usize),
    State(usize),
    Gate(GateId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sink {
    GatePin { gate: GateId, pin: usize },
    DffData(usize),
    Output(usize),
}

#[derive(Debug, Clone)]
pub struct Circuit {
    name: String,
    labels: Vec<String>,
    index: HashMap<String, NetId>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    dffs: Vec<Dff>,
    gates: Vec<Gate>,
    drivers: Vec<Driver>,
    sinks: Vec<Vec<Sink>>,
    sink_offsets: Vec<usize>,
    pin_sinks: Vec<Vec<usize>>,
    dff_sinks: Vec<usize>,
    output_sinks: Vec<usize>,
    order: Vec<GateId>,
}

/// How test vectors map onto the circuit: primary inputs first, then
/// flip-flop states treated as pseudo-primary inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestInterface {
    pub width: usize,
    pub num_inputs: usize,
    /// Net driven by each vector bit.
    pub nets: Vec<NetId>,
}

impl Circuit {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn num_nets(&self) -> usize {
        self.labels.len()
    }

    pub fn inputs(&self) -> &[NetId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[NetId] {
        &self.outputs
    }

    pub fn dffs(&self) -> &[Dff] {
        &self.dffs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn label(&self, net: NetId) -> &str {
        &self.labels[net]
    }

    pub fn net(&self, label: &str) -> Option<NetId> {
        self.index.get(label).copied()
    }

    pub fn driver(&self, net: NetId) -> Driver {
        self.drivers[net]
    }

    pub fn sinks(&self, net: NetId) -> &[Sink] {
        &self.sinks[net]
    }

    pub fn total_sinks(&self) -> usize {
        self.sink_offsets.last().copied().unwrap_or(0)
    }

    /// Flat index of sink `sink` of `net`, unique across the circuit.
    pub fn sink_id(&self, net: NetId, sink: usize) -> usize {
        self.sink_offsets[net] + sink
    }

    /// Flat sink id of each gate input pin.
    pub fn pin_sink_ids(&self, gate: GateId) -> &[usize] {
        &self.pin_sinks[gate]
    }

    /// Flat sink id of each flip-flop data pin.
    pub fn dff_sink_ids(&self) -> &[usize] {
        &self.dff_sinks
    }

    /// Flat sink id of each primary output pin.
    pub fn output_sink_ids(&self) -> &[usize] {
        &self.output_sinks
    }

    /// Cached combinational evaluation order.
    pub fn order(&self) -> &[GateId] {
        &self.order
    }

    pub fn test_interface(&self) -> TestInterface {
        test_interface(self)
    }

    pub fn width(&self) -> usize {
        self.inputs.len() + self.dffs.len()
    }

    /// Emit the circuit as `.bench` text that parses back to an isomorphic circuit.
    pub fn to_bench(&self) -> String {
        let mut out = String::new();
        if !self.name.is_empty() {
            let _ = writeln!(out, "# {}", self.name);
        }
        for &n in &self.inputs {
            let _ = writeln!(out, "INPUT({})", self.labels[n]);
        }
        for &n in &self.outputs {
            let _ = writeln!(out, "OUTPUT({})", self.labels[n]);
        }
        for d in &self.dffs {
            let _ = writeln!(
                out,
                "{} = DFF({})",
                self.labels[d.state], self.labels[d.data]
            );
        }
        for g in &self.gates {
            let ins: Vec<&str> = g.inputs.iter().map(|&n| self.labels[n].as_str()).collect();
            let _ = writeln!(
                out,
                "{} = {}({})",
                self.labels[g.output],
                g.kind.keyword(),
                ins.join(", ")
            );
        }
        out
    }
}

/// Incremental constructor enforcing the netlist invariants.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    name: String,
    labels: Vec<String>,
    index: HashMap<String, NetId>,
    drivers: Vec<Option<Driver>>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    dffs: Vec<Dff>,
    gates: Vec<(NetId, GateKind, Vec<NetId>)>,
    line: usize,
}

impl CircuitBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    /// Interns `label`, assigning the next dense id on first sight.
    pub fn net(&mut self, label: &str) -> NetId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        self.drivers.push(None);
        id
    }

    fn drive(&mut self, net: NetId, driver: Driver) -> Result<()> {
        if self.drivers[net].is_some() {
            return Err(Error::DuplicateDriver {
                label: self.labels[net].clone(),
                line: self.line,
            });
        }
        self.drivers[net] = Some(driver);
        Ok(())
    }

    pub fn input(&mut self, label: &str) -> Result<NetId> {
        let net = self.net(label);
        self.drive(net, Driver::Input(self.inputs.len()))?;
        self.inputs.push(net);
        Ok(net)
    }

    pub fn output(&mut self, label: &str) -> NetId {
        let net = self.net(label);
        self.outputs.push(net);
        net
    }

    pub fn dff(&mut self, state: &str, data: &str) -> Result<()> {
        let q = self.net(state);
        let d = self.net(data);
        self.drive(q, Driver::State(self.dffs.len()))?;
        self.dffs.push(Dff { state: q, data: d });
        Ok(())
    }

    pub fn gate(&mut self, output: &str, kind: GateKind, inputs: &[&str]) -> Result<()> {
        if inputs.is_empty() || (kind.is_unary() && inputs.len() != 1) {
            return Err(Error::Syntax {
                line: self.line,
                message: format!(
                    "{} gate `{}` has {} inputs",
                    kind.keyword(),
                    output,
                    inputs.len()
                ),
            });
        }
        let out = self.net(output);
        let ins = inputs.iter().map(|l| self.net(l)).collect();
        self.drive(out, Driver::Gate(self.gates.len()))?;
        self.gates.push((out, kind, ins));
        Ok(())
    }

    pub fn build(self) -> Result<Circuit> {
        if self.labels.is_empty() {
            return Err(Error::EmptyNetlist);
        }
        let mut drivers = Vec::with_capacity(self.drivers.len());
        for (net, d) in self.drivers.iter().enumerate() {
            match d {
                Some(d) => drivers.push(*d),
                None => {
                    return Err(Error::UndefinedNet {
                        label: self.labels[net].clone(),
                    })
                }
            }
        }

        let n = self.labels.len();
        let mut sinks: Vec<Vec<Sink>> = vec![Vec::new(); n];
        for (g, (_, _, ins)) in self.gates.iter().enumerate() {
            for (pin, &net) in ins.iter().enumerate() {
                sinks[net].push(Sink::GatePin { gate: g, pin });
            }
        }
        for (i, d) in self.dffs.iter().enumerate() {
            sinks[d.data].push(Sink::DffData(i));
        }
        for (i, &o) in self.outputs.iter().enumerate() {
            sinks[o].push(Sink::Output(i));
        }

        let mut sink_offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for s in &sinks {
            sink_offsets.push(acc);
            acc += s.len();
        }
        sink_offsets.push(acc);

        let mut pin_sinks: Vec<Vec<usize>> = self
            .gates
            .iter()
            .map(|(_, _, ins)| vec![0; ins.len()])
            .collect();
        let mut dff_sinks = vec![0; self.dffs.len()];
        let mut output_sinks = vec![0; self.outputs.len()];
        for (net, list) in sinks.iter().enumerate() {
            for (k, s) in list.iter().enumerate() {
                let id = sink_offsets[net] + k;
                match *s {
                    Sink::GatePin { gate, pin } => pin_sinks[gate][pin] = id,
                    Sink::DffData(i) => dff_sinks[i] = id,
                    Sink::Output(i) => output_sinks[i] = id,
                }
            }
        }

        let gates = self
            .gates
            .into_iter()
            .map(|(output, kind, inputs)| Gate {
                output,
                kind,
                inputs,
                load_count: sinks[output].len(),
            })
            .collect();

        let mut circuit = Circuit {
            name: self.name,
            labels: self.labels,
            index: self.index,
            inputs: self.inputs,
            outputs: self.outputs,
            dffs: self.dffs,
            gates,
            drivers,
            sinks,
            sink_offsets,
            pin_sinks,
            dff_sinks,
            output_sinks,
            order: Vec::new(),
        };
        circuit.order = levelize(&circuit)?;
        Ok(circuit)
    }
}

/// Parses ISCAS-89 `.bench` text.
pub fn parse_bench(text: &str) -> Result<Circuit> {
    let mut b = CircuitBuilder::new("");
    let mut saw_statement = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        b.line = line_no;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        saw_statement = true;
        let syntax = |message: &str| Error::Syntax {
            line: line_no,
            message: message.to_string(),
        };

        if let Some((lhs, rhs)) = line.split_once('=') {
            let target = lhs.trim();
            if !is_label(target) {
                return Err(syntax("expected a net name before `=`"));
            }
            let (kind, args) = call(rhs.trim()).ok_or_else(|| syntax("expected `KIND(args)`"))?;
            if kind.eq_ignore_ascii_case("DFF") {
                if args.len() != 1 {
                    return Err(syntax("DFF takes exactly one input"));
                }
                b.dff(target, args[0])?;
            } else {
                let kind = GateKind::from_keyword(kind)
                    .or_else(|| kind.eq_ignore_ascii_case("BUF").then_some(GateKind::Buf))
                    .ok_or_else(|| syntax(&format!("unknown gate kind `{kind}`")))?;
                b.gate(target, kind, &args)?;
            }
        } else {
            let (kw, args) = call(line)
                .ok_or_else(|| syntax("expected INPUT(..), OUTPUT(..) or an assignment"))?;
            if args.len() != 1 {
                return Err(syntax("INPUT/OUTPUT take exactly one net"));
            }
            if kw.eq_ignore_ascii_case("INPUT") {
                b.input(args[0])?;
            } else if kw.eq_ignore_ascii_case("OUTPUT") {
                b.output(args[0]);
            } else {
                return Err(syntax(&format!("unknown declaration `{kw}`")));
            }
        }
    }
    if !saw_statement {
        return Err(Error::EmptyNetlist);
    }
    b.build()
}

fn is_label(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| !c.is_whitespace() && !matches!(c, '(' | ')' | ',' | '=' | '#'))
}

/// Splits `NAME(a, b, c)` into its keyword and argument labels.
fn call(s: &str) -> Option<(&str, Vec<&str>)> {
    let open = s.find('(')?;
    let inner = s[open + 1..].strip_suffix(')')?;
    let name = s[..open].trim();
    if !is_label(name) || inner.contains(['(', ')']) {
        return None;
    }
    let args: Vec<&str> = inner.split(',').map(str::trim).collect();
    if args.iter().any(|a| !is_label(a)) {
        return None;
    }
    Some((name, args))
}

/// Topological order of the combinational gates. Ready gates are released
/// lowest index first, so the order is unique for a given circuit.
pub fn levelize(c: &Circuit) -> Result<Vec<GateId>> {
    let mut indegree: Vec<usize> = c
        .gates
        .iter()
        .map(|g| {
            g.inputs
                .iter()
                .filter(|&&n| matches!(c.drivers[n], Driver::Gate(_)))
                .count()
        })
        .collect();
    let mut ready: BinaryHeap<Reverse<GateId>> = indegree
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(g, _)| Reverse(g))
        .collect();
    let mut order = Vec::with_capacity(c.gates.len());
    while let Some(Reverse(g)) = ready.pop() {
        order.push(g);
        for s in &c.sinks[c.gates[g].output] {
            if let Sink::GatePin { gate, .. } = *s {
                indegree[gate] -= 1;
                if indegree[gate] == 0 {
                    ready.push(Reverse(gate));
                }
            }
        }
    }
    if order.len() != c.gates.len() {
        let stuck = indegree.iter().position(|&d| d > 0).unwrap_or(0);
        return Err(Error::CombinationalCycle {
            label: c.labels[c.gates[stuck].output].clone(),
        });
    }
    Ok(order)
}

pub fn test_interface(c: &Circuit) -> TestInterface {
    let nets: Vec<NetId> = c
        .inputs
        .iter()
        .copied()
        .chain(c.dffs.iter().map(|d| d.state))
        .collect();
    TestInterface {
        width: nets.len(),
        num_inputs: c.inputs.len(),
        nets,
    }
}
