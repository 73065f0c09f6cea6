//! Small hand-built netlists shipped with the crate.

use crate::netlist::{parse_bench_named, Circuit};
use crate::resynth::sweep;
use crate::sat::substitute_key;
use crate::sim::TernaryPattern;

pub const NOR_PROBE: &str = include_str!("../fixtures/nor_probe.bench");
pub const PF_HOST: &str = include_str!("../fixtures/pf_host.bench");
pub const PF_PERTURBED: &str = include_str!("../fixtures/pf_perturbed.bench");
pub const PF_LOCKED: &str = include_str!("../fixtures/pf_locked.bench");
pub const PF_MERGED_PERTURBED: &str = include_str!("../fixtures/pf_merged_perturbed.bench");
pub const PF_MERGED_LOCKED: &str = include_str!("../fixtures/pf_merged_locked.bench");
pub const KG_LOCKED: &str = include_str!("../fixtures/kg_locked.bench");
pub const KG_INVERTED_LOCKED: &str = include_str!("../fixtures/kg_inverted_locked.bench");
pub const KG_DECOMPOSED_LOCKED: &str = include_str!("../fixtures/kg_decomposed_locked.bench");

/// A locked netlist with its planted key.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub locked: Circuit,
    pub key: Vec<bool>,
}

impl Fixture {
    /// The activated circuit: the planted key tied in and swept.
    pub fn original(&self) -> Circuit {
        let k = TernaryPattern::from_bools(&self.key);
        sweep(&substitute_key(&self.locked, &k).expect("fixture key width"))
    }
}

fn bits(s: &str) -> Vec<bool> {
    s.bytes().map(|b| b == b'1').collect()
}

fn load(name: &'static str, text: &str, key: &str) -> Fixture {
    Fixture {
        name,
        locked: parse_bench_named(text, name).expect("shipped fixture parses"),
        key: bits(key),
    }
}

pub fn parse(text: &str) -> Circuit {
    crate::netlist::parse_bench(text).expect("shipped fixture parses")
}

pub fn pf() -> Fixture {
    load("pf_locked", PF_LOCKED, "1001")
}

pub fn pf_merged() -> Fixture {
    load("pf_merged_locked", PF_MERGED_LOCKED, "0000")
}

pub fn kg() -> Fixture {
    load("kg_locked", KG_LOCKED, "01101011")
}

pub fn kg_inverted() -> Fixture {
    load("kg_inverted_locked", KG_INVERTED_LOCKED, "01101011")
}

pub fn kg_decomposed() -> Fixture {
    load("kg_decomposed_locked", KG_DECOMPOSED_LOCKED, "11100011")
}

/// Every shipped locked fixture.
pub fn locked_fixtures() -> Vec<Fixture> {
    vec![pf(), pf_merged(), kg(), kg_inverted(), kg_decomposed()]
}
