//! Structural key recovery with an optional oracle-guided finish.

mod hc;
mod nhc;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lock::Family;
use crate::netlist::{Circuit, NetlistError};
use crate::sat::{sat_attack, SatAttackOptions, SatError};
use crate::sim::{Oracle, Ternary, TernaryPattern};

pub use hc::{
    attack_hard_coded, candidate_nets, extract_nets, key_extraction, key_input_mapping, probe, CandidateNet,
    ExtractionMode, KeyInputMap, KeyPair, ProbeResult,
};
pub use nhc::{
    attack_non_hard_coded, extract_locking_unit, extract_locking_units, get_attributes, key_mapping, Bin,
    EntryGate, KeyAttribute, LockingUnit,
};

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("circuit has no key inputs")]
    NoKeyInputs,
    #[error("exhausted {tried} candidate nets without a key-revealing one; try --family nhc")]
    ExhaustedCandidates { tried: usize },
    #[error("no net joins all key inputs with a half-width input support; try --family hc")]
    NotNonHardCoded,
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// Where a recovered key bit came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BitSource {
    Structural,
    Sat,
    Unresolved,
}

/// Which attack path to run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyChoice {
    #[default]
    Auto,
    Hc,
    Nhc,
}

impl fmt::Display for FamilyChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyChoice::Auto => "auto",
            FamilyChoice::Hc => "hc",
            FamilyChoice::Nhc => "nhc",
        })
    }
}

impl FromStr for FamilyChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(FamilyChoice::Auto),
            "hc" => Ok(FamilyChoice::Hc),
            "nhc" => Ok(FamilyChoice::Nhc),
            _ => Err(format!("unknown family `{s}` (auto, hc, nhc)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AttackOptions {
    pub family: FamilyChoice,
    /// Number of protected patterns the hard-coded path expects.
    pub num_pp: usize,
    pub sat: SatAttackOptions,
}

impl Default for AttackOptions {
    fn default() -> Self {
        AttackOptions {
            family: FamilyChoice::Auto,
            num_pp: 1,
            sat: SatAttackOptions::new(),
        }
    }
}

/// Wall time per attack phase, in seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub structural: f64,
    pub sat: f64,
}

#[derive(Clone, Debug)]
pub struct AttackOutcome {
    pub family: Family,
    /// Key as read off the structure, before any oracle use.
    pub structural: TernaryPattern,
    /// Final key; still has x bits when no oracle was available.
    pub key: TernaryPattern,
    pub sources: Vec<BitSource>,
    pub dip_count: usize,
    pub oracle_queries: u64,
    pub times: PhaseTimes,
    /// Accepted key-revealing net(s) or critical wire(s).
    pub anchors: Vec<String>,
    /// K1 xor K2 per key-gate pair, bin-1 key order. Empty for hard-coded.
    pub mapping: Vec<bool>,
}

impl AttackOutcome {
    pub fn complete(&self) -> bool {
        self.key.is_fully_specified()
    }

    pub fn oracle_less(&self) -> bool {
        self.dip_count == 0 && self.oracle_queries == 0
    }

    pub fn count(&self, s: BitSource) -> usize {
        self.sources.iter().filter(|b| **b == s).count()
    }
}

/// Fills the x bits of `structural` with the oracle when there is one.
/// Returns `SatError::WrongPartialKey` unchanged so callers can retry.
pub(crate) fn finish(
    c: &Circuit,
    oracle: Option<&Oracle>,
    structural: TernaryPattern,
    family: Family,
    anchors: Vec<String>,
    opts: &AttackOptions,
    started: Instant,
) -> Result<AttackOutcome, AttackError> {
    let structural_time = started.elapsed().as_secs_f64();
    let mut out = AttackOutcome {
        family,
        key: structural.clone(),
        sources: structural
            .0
            .iter()
            .map(|t| if t.is_x() { BitSource::Unresolved } else { BitSource::Structural })
            .collect(),
        structural,
        dip_count: 0,
        oracle_queries: 0,
        times: PhaseTimes {
            structural: structural_time,
            sat: 0.0,
        },
        anchors,
        mapping: Vec::new(),
    };
    let Some(o) = oracle else { return Ok(out) };
    if out.structural.is_fully_specified() {
        return Ok(out);
    }
    let q0 = o.queries();
    let t = Instant::now();
    let res = sat_attack(c, o, &out.structural, &opts.sat)?;
    out.times.sat = t.elapsed().as_secs_f64();
    out.oracle_queries = o.queries() - q0;
    out.dip_count = res.trace.iterations();
    out.key = TernaryPattern::from_bools(&res.key);
    for s in out.sources.iter_mut() {
        if *s == BitSource::Unresolved {
            *s = BitSource::Sat;
        }
    }
    Ok(out)
}

fn recoverable(e: &AttackError) -> bool {
    matches!(
        e,
        AttackError::ExhaustedCandidates { .. } | AttackError::NotNonHardCoded | AttackError::Sat(SatError::WrongPartialKey)
    )
}

/// Runs the selected attack path. In auto mode the hard-coded path goes first
/// when some net passes its structural filters, otherwise the key-gate path;
/// the other path is the fallback, and a plain oracle-guided attack is the
/// last resort.
pub fn attack(c: &Circuit, oracle: Option<&Oracle>, opts: &AttackOptions) -> Result<AttackOutcome, AttackError> {
    match opts.family {
        FamilyChoice::Hc => attack_hard_coded(c, oracle, opts),
        FamilyChoice::Nhc => attack_non_hard_coded(c, oracle, opts),
        FamilyChoice::Auto => {
            if c.key_inputs().is_empty() {
                return Err(AttackError::NoKeyInputs);
            }
            let started = Instant::now();
            let order = if hc::has_candidates(c, opts.num_pp)? {
                [FamilyChoice::Hc, FamilyChoice::Nhc]
            } else {
                [FamilyChoice::Nhc, FamilyChoice::Hc]
            };
            let mut last = None;
            for f in order {
                let sub = AttackOptions { family: f, ..opts.clone() };
                match attack(c, oracle, &sub) {
                    Ok(o) => return Ok(o),
                    Err(e) if recoverable(&e) => last = Some(e),
                    Err(e) => return Err(e),
                }
            }
            match oracle {
                Some(_) => {
                    let x = TernaryPattern(vec![Ternary::X; c.key_inputs().len()]);
                    finish(c, oracle, x, Family::HardCoded, Vec::new(), opts, started)
                }
                None => Err(last.unwrap_or(AttackError::NotNonHardCoded)),
            }
        }
    }
}
