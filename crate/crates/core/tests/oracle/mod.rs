//! Reference interpreter used as an independent oracle. It re-parses the
//! `.bench` text with plain string handling and evaluates nets by label,
//! recursively, without levelization or dense ids.

#![allow(dead_code)]

use std::collections::HashMap;

pub struct Interp {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// (state, data) in declaration order.
    pub dffs: Vec<(String, String)>,
    pub gates: HashMap<String, (String, Vec<String>)>,
    /// Gate outputs in declaration order.
    pub gate_order: Vec<String>,
}

fn inner(s: &str) -> &str {
    let open = s.find('(').expect("open paren");
    let close = s.rfind(')').expect("close paren");
    s[open + 1..close].trim()
}

impl Interp {
    pub fn parse(text: &str) -> Self {
        let mut it = Interp {
            inputs: vec![],
            outputs: vec![],
            dffs: vec![],
            gates: HashMap::new(),
            gate_order: vec![],
        };
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            if let Some((lhs, rhs)) = line.split_once('=') {
                let lhs = lhs.trim().to_string();
                let kind = rhs.trim()[..rhs.trim().find('(').unwrap()]
                    .trim()
                    .to_uppercase();
                let args: Vec<String> = inner(rhs)
                    .split(',')
                    .map(|a| a.trim().to_string())
                    .collect();
                if kind == "DFF" {
                    it.dffs.push((lhs, args[0].clone()));
                } else {
                    it.gate_order.push(lhs.clone());
                    it.gates.insert(lhs, (kind, args));
                }
            } else if line.to_uppercase().starts_with("INPUT") {
                it.inputs.push(inner(line).to_string());
            } else if line.to_uppercase().starts_with("OUTPUT") {
                it.outputs.push(inner(line).to_string());
            }
        }
        it
    }

    pub fn width(&self) -> usize {
        self.inputs.len() + self.dffs.len()
    }

    /// All net labels: inputs, flip-flop states, gate outputs.
    pub fn nets(&self) -> Vec<String> {
        self.inputs
            .iter()
            .chain(self.dffs.iter().map(|(q, _)| q))
            .chain(self.gate_order.iter())
            .cloned()
            .collect()
    }

    /// Values of every net for interface bits `bits` (inputs then states).
    /// `force` pins one net to a constant (a stem stuck-at fault).
    pub fn eval(&self, bits: &[bool], force: Option<(&str, bool)>) -> HashMap<String, bool> {
        let mut vals = HashMap::new();
        for (l, &b) in self
            .inputs
            .iter()
            .chain(self.dffs.iter().map(|(q, _)| q))
            .zip(bits)
        {
            vals.insert(l.clone(), b);
        }
        if let Some((l, b)) = force {
            vals.insert(l.to_string(), b);
        }
        for g in &self.gate_order {
            self.value(g, &mut vals);
        }
        vals
    }

    fn value(&self, net: &str, vals: &mut HashMap<String, bool>) -> bool {
        if let Some(&v) = vals.get(net) {
            return v;
        }
        let (kind, args) = &self.gates[net];
        let ins: Vec<bool> = args.iter().map(|a| self.value(a, vals)).collect();
        let and = ins.iter().all(|&b| b);
        let or = ins.iter().any(|&b| b);
        let xor = ins.iter().filter(|&&b| b).count() % 2 == 1;
        let v = match kind.as_str() {
            "AND" => and,
            "NAND" => !and,
            "OR" => or,
            "NOR" => !or,
            "XOR" => xor,
            "XNOR" => !xor,
            "NOT" => !ins[0],
            "BUF" | "BUFF" => ins[0],
            k => panic!("unknown gate {k}"),
        };
        vals.insert(net.to_string(), v);
        v
    }

    /// Primary outputs followed by flip-flop data values.
    pub fn observe(&self, vals: &HashMap<String, bool>) -> Vec<bool> {
        self.outputs
            .iter()
            .chain(self.dffs.iter().map(|(_, d)| d))
            .map(|l| vals[l])
            .collect()
    }

    /// Number of sinks of each net: gate pins, flip-flop data pins, outputs.
    pub fn fanout(&self, net: &str) -> usize {
        let pins: usize = self
            .gates
            .values()
            .map(|(_, a)| a.iter().filter(|x| *x == net).count())
            .sum();
        let dff = self.dffs.iter().filter(|(_, d)| d == net).count();
        let po = self.outputs.iter().filter(|o| *o == net).count();
        pins + dff + po
    }
}

pub fn bits(s: &str) -> Vec<bool> {
    s.chars().map(|c| c == '1').collect()
}

pub fn all_vectors(width: usize) -> Vec<Vec<bool>> {
    (0u32..1 << width)
        .map(|m| (0..width).map(|i| m >> (width - 1 - i) & 1 == 1).collect())
        .collect()
}
