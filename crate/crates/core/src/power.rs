//! Switching activity and dynamic power.
//!
//! Power follows the usual CMOS switching model
//! `P = Vdd² / (2 · T) · Σ_g toggle(g) · C(g)` summed over gate outputs only.
//! Pseudo-input (state) line transitions are not charged.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::{Circuit, GateId};
use crate::simcore::{SequenceResult, TestVector};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapModel {
    Unit,
    /// `1 + load_count`, in unit capacitances.
    #[default]
    Fanout,
    /// Farads per gate, keyed by the gate's output label.
    Table(BTreeMap<String, f64>),
}

impl CapModel {
    pub fn kind(&self) -> &'static str {
        match self {
            CapModel::Unit => "unit",
            CapModel::Fanout => "fanout",
            CapModel::Table(_) => "table",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerModel {
    pub vdd: f64,
    pub clock_period: f64,
    pub cap_model: CapModel,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            vdd: 1.0,
            clock_period: 1.0,
            cap_model: CapModel::Fanout,
        }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.vdd.is_finite() && self.vdd > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "vdd must be > 0, got {}",
                self.vdd
            )));
        }
        if !(self.clock_period.is_finite() && self.clock_period > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "clock period must be > 0, got {}",
                self.clock_period
            )));
        }
        Ok(())
    }

    /// Capacitance of every gate, indexed like [`Circuit::gates`].
    pub fn gate_capacitances(&self, c: &Circuit) -> Result<Vec<f64>> {
        (0..c.gates().len())
            .map(|g| capacitance(c, g, self))
            .collect()
    }
}

pub fn capacitance(c: &Circuit, g: GateId, model: &PowerModel) -> Result<f64> {
    let gate = &c.gates()[g];
    match &model.cap_model {
        CapModel::Unit => Ok(1.0),
        CapModel::Fanout => Ok(1.0 + gate.load_count as f64),
        CapModel::Table(t) => {
            let label = c.label(gate.output);
            t.get(label)
                .copied()
                .ok_or_else(|| Error::MissingCapacitance(label.to_string()))
        }
    }
}

/// `Vdd² / (2 · clock_period) · total_weighted`.
pub fn estimate_power(total_weighted: f64, model: &PowerModel) -> Result<f64> {
    model.validate()?;
    Ok(model.vdd * model.vdd / (2.0 * model.clock_period) * total_weighted)
}

/// Power from raw per-gate toggle counts and capacitances.
pub fn estimate_power_from_toggles(
    toggles: &[u32],
    caps: &[f64],
    model: &PowerModel,
) -> Result<f64> {
    if toggles.len() != caps.len() {
        return Err(Error::LengthMismatch(toggles.len(), caps.len()));
    }
    let total = toggles
        .iter()
        .zip(caps)
        .map(|(&t, &c)| f64::from(t) * c)
        .sum();
    estimate_power(total, model)
}

/// Sum of bit differences between consecutive vectors.
pub fn adjacent_hamming(frame: &[TestVector]) -> Result<usize> {
    if frame.is_empty() {
        return Err(Error::EmptyFrame);
    }
    Ok(frame.windows(2).map(|w| w[0].hamming(&w[1])).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivitySummary {
    pub per_gate_toggles: Vec<u32>,
    pub total_weighted: f64,
    pub adjacent_hamming: usize,
}

impl ActivitySummary {
    pub fn new(seq: &SequenceResult, frame: &[TestVector]) -> Result<Self> {
        Ok(Self {
            per_gate_toggles: seq.cumulative_toggles.clone(),
            total_weighted: seq.total_weighted,
            adjacent_hamming: adjacent_hamming(frame)?,
        })
    }
}

/// Reads a `gate_label,farads` table. A header row is optional.
pub fn read_cap_table(reader: impl Read) -> Result<BTreeMap<String, f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut table = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::CapTable(e.to_string()))?;
        if rec.len() != 2 {
            return Err(Error::CapTable(format!(
                "row {} has {} fields",
                i + 1,
                rec.len()
            )));
        }
        let farads = match rec[1].parse::<f64>() {
            Ok(f) => f,
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::CapTable(format!(
                    "row {}: bad value `{}`",
                    i + 1,
                    &rec[1]
                )))
            }
        };
        if !(farads.is_finite() && farads >= 0.0) {
            return Err(Error::CapTable(format!(
                "row {}: capacitance must be >= 0",
                i + 1
            )));
        }
        table.insert(rec[0].to_string(), farads);
    }
    Ok(table)
}
