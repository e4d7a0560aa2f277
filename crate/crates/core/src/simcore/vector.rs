use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Fixed-width bit string over the test interface. Character `i` of the
/// textual form is interface bit `i` (primary inputs, then flip-flop states).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TestVector(Vec<bool>);

impl TestVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(width: usize) -> Self {
        Self(vec![false; width])
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|b| !b).collect())
    }

    /// Number of differing bit positions. Widths must match.
    pub fn hamming(&self, other: &TestVector) -> usize {
        debug_assert_eq!(self.width(), other.width());
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl FromStr for TestVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        s.chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidVector(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .and_then(|bits| {
                if bits.is_empty() {
                    Err(Error::InvalidVector(s.to_string()))
                } else {
                    Ok(Self(bits))
                }
            })
    }
}

impl fmt::Display for TestVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for TestVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TestVector({self})")
    }
}

impl Serialize for TestVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TestVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
