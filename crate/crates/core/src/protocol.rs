//! Evaluation protocols over set identifiers.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairLabel {
    Same,
    Different,
}

impl PairLabel {
    pub fn is_same(self) -> bool {
        self == PairLabel::Same
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PairLabel::Same => "same",
            PairLabel::Different => "different",
        }
    }
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "same" | "1" => Ok(PairLabel::Same),
            "different" | "0" => Ok(PairLabel::Different),
            other => Err(Error::Protocol(format!("unknown pair label `{other}`"))),
        }
    }
}

/// One 1:1 verification comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationPair {
    pub a: String,
    pub b: String,
    pub label: PairLabel,
}

/// One row of a 1:N protocol: a set enrolled in the gallery or used as probe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentificationEntry {
    pub set_id: String,
    pub gallery: bool,
    pub identity: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalProtocol {
    pub pairs: Vec<VerificationPair>,
    pub identification: Vec<IdentificationEntry>,
}

impl EvalProtocol {
    pub fn probes(&self) -> impl Iterator<Item = &IdentificationEntry> {
        self.identification.iter().filter(|e| !e.gallery)
    }

    pub fn gallery(&self) -> impl Iterator<Item = &IdentificationEntry> {
        self.identification.iter().filter(|e| e.gallery)
    }

    /// Checks that every referenced set resolves through `known`, that no pair
    /// compares a set with itself, and that gallery identities are unique.
    pub fn validate(&self, known: impl Fn(&str) -> bool) -> Result<()> {
        for (i, p) in self.pairs.iter().enumerate() {
            if p.a == p.b {
                return Err(Error::Protocol(format!(
                    "pair {i} compares set `{}` with itself",
                    p.a
                )));
            }
            for id in [&p.a, &p.b] {
                if !known(id) {
                    return Err(Error::Protocol(format!("pair {i}: unknown set `{id}`")));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for e in &self.identification {
            if !known(&e.set_id) {
                return Err(Error::Protocol(format!(
                    "identification: unknown set `{}`",
                    e.set_id
                )));
            }
            if e.gallery && !seen.insert(e.identity.as_str()) {
                return Err(Error::Protocol(format!(
                    "identity `{}` is enrolled twice in the gallery",
                    e.identity
                )));
            }
        }
        Ok(())
    }
}
