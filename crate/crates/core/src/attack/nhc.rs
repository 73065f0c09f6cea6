//! Key recovery for key-gate locking units: find the wire that joins the
//! unit to the circuit, resynthesize the unit, and map each key gate's
//! attributes to a key bit.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{finish, AttackError, AttackOptions, AttackOutcome};
use crate::lock::Family;
use crate::netlist::{Bitset, Circuit, GateId, GateKind, NetId, SupportMap};
use crate::resynth::{remap_standard, sweep};
use crate::sat::SatError;
use crate::sim::{Oracle, Ternary, TernaryPattern};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bin {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryGate {
    Xor,
    Xnor,
}

/// What the structure says about one key input; `None` means unknown.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyAttribute {
    pub key: usize,
    pub pip: Option<String>,
    pub bin: Option<Bin>,
    pub gate: Option<EntryGate>,
    pub inverted: Option<bool>,
}

impl KeyAttribute {
    pub fn bit(&self) -> Option<bool> {
        Some(key_mapping(self.bin?, self.gate?, self.inverted?))
    }
}

/// A key-gate unit: the critical wire and its cone.
#[derive(Clone, Debug)]
pub struct LockingUnit {
    pub cn: NetId,
    pub cn_name: String,
    /// Key indices feeding the unit.
    pub keys: Vec<usize>,
    pub key_names: Vec<String>,
    /// Fanin cone of the critical wire, with the wire as its only output.
    pub cone: Circuit,
}

/// The key-gate mapping table.
pub fn key_mapping(bin: Bin, gate: EntryGate, inverted: bool) -> bool {
    (gate == EntryGate::Xnor) ^ inverted ^ (bin == Bin::Two)
}

/// Longest gate path from any key input to each net; `None` off key cones.
fn key_depths(c: &Circuit) -> Vec<Option<u32>> {
    let mut d: Vec<Option<u32>> = vec![None; c.num_nets()];
    for k in c.key_inputs() {
        d[k.index()] = Some(0);
    }
    for g in c.topo_order() {
        let g = c.gate(*g);
        d[g.output.index()] = g.inputs.iter().filter_map(|i| d[i.index()]).max().map(|m| m + 1);
    }
    d
}

fn find_unit(c: &Circuit, sup: &SupportMap, depth: &[Option<u32>], group: &Bitset) -> Option<NetId> {
    let nk = group.count();
    let ni = c.inputs().len();
    let mut best: Option<(u32, NetId)> = None;
    for g in c.topo_order() {
        let n = c.gate(*g).output;
        let s = &sup.starts[n.index()];
        if !group.is_subset(s) {
            continue;
        }
        let keys = s.iter().filter(|i| *i >= ni).count();
        let pis = s.count() - keys;
        if keys != nk || 2 * pis != nk {
            continue;
        }
        let d = depth[n.index()].unwrap_or(0);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, n));
        }
    }
    best.map(|(_, n)| n)
}

fn unit_at(c: &Circuit, cn: NetId, group: &Bitset) -> Result<LockingUnit, AttackError> {
    let ni = c.inputs().len();
    let keys: Vec<usize> = group.iter().map(|i| i - ni).collect();
    Ok(LockingUnit {
        cn,
        cn_name: c.net_name(cn).to_string(),
        key_names: keys.iter().map(|k| key_name(c, *k)).collect(),
        keys,
        cone: c.extract_cone(cn)?,
    })
}

/// The single unit collecting every key input.
pub fn extract_locking_unit(c: &Circuit) -> Result<LockingUnit, AttackError> {
    if c.key_inputs().is_empty() {
        return Err(AttackError::NoKeyInputs);
    }
    let sup = SupportMap::compute(c);
    let depth = key_depths(c);
    let ni = c.inputs().len();
    let mut all = Bitset::new(c.num_ports());
    for i in ni..c.num_ports() {
        all.set(i);
    }
    let cn = find_unit(c, &sup, &depth, &all).ok_or(AttackError::NotNonHardCoded)?;
    unit_at(c, cn, &all)
}

/// One unit over all key inputs, or else one unit per group of key inputs
/// that reach the same outputs.
pub fn extract_locking_units(c: &Circuit) -> Result<Vec<LockingUnit>, AttackError> {
    match extract_locking_unit(c) {
        Ok(u) => return Ok(vec![u]),
        Err(AttackError::NotNonHardCoded) => {}
        Err(e) => return Err(e),
    }
    let sup = SupportMap::compute(c);
    let depth = key_depths(c);
    let ni = c.inputs().len();
    let mut groups: BTreeMap<Vec<usize>, Bitset> = BTreeMap::new();
    for (i, k) in c.key_inputs().iter().enumerate() {
        let ends: Vec<usize> = sup.ends[k.index()].iter().collect();
        groups
            .entry(ends)
            .or_insert_with(|| Bitset::new(c.num_ports()))
            .set(ni + i);
    }
    if groups.len() < 2 {
        return Err(AttackError::NotNonHardCoded);
    }
    let mut units = Vec::new();
    for g in groups.values() {
        let cn = find_unit(c, &sup, &depth, g).ok_or(AttackError::NotNonHardCoded)?;
        units.push(unit_at(c, cn, g)?);
    }
    units.sort_by_key(|u| u.keys[0]);
    Ok(units)
}

fn key_name(c: &Circuit, k: usize) -> String {
    c.net_name(c.key_inputs()[k]).to_string()
}

fn entry_gate(r: &Circuit, kn: NetId) -> Option<(GateId, EntryGate, NetId)> {
    let fo = r.fanout(kn);
    if fo.len() != 1 {
        return None;
    }
    let g = r.gate(fo[0]);
    let kind = match g.kind {
        GateKind::Xor => EntryGate::Xor,
        GateKind::Xnor => EntryGate::Xnor,
        _ => return None,
    };
    if g.inputs.len() != 2 {
        return None;
    }
    let other = if g.inputs[0] == kn { g.inputs[1] } else { g.inputs[0] };
    (r.is_input(other) && !r.is_key_input(other)).then_some((fo[0], kind, other))
}

/// Inversion parity from `start` to the output, if every path agrees.
fn path_parity(r: &Circuit, start: NetId) -> Option<bool> {
    let mut par = vec![0u8; r.num_nets()];
    par[start.index()] = 1;
    for g in r.topo_order() {
        let g = r.gate(*g);
        let inv = matches!(g.kind, GateKind::Inv | GateKind::Nand | GateKind::Nor | GateKind::Xnor);
        let mut acc = 0u8;
        for i in &g.inputs {
            let p = par[i.index()];
            acc |= if inv { (p & 1) << 1 | (p >> 1) } else { p };
        }
        if g.output != start {
            par[g.output.index()] = acc;
        }
    }
    match par[r.outputs()[0].index()] {
        1 => Some(false),
        2 => Some(true),
        _ => None,
    }
}

/// Resynthesized unit cone; attributes are read from this.
fn normalize(unit: &LockingUnit) -> Circuit {
    sweep(&remap_standard(&unit.cone))
}

/// Per-key attributes of a unit. Keys the cone as given does not decode are
/// read again after remapping and sweeping it.
pub fn get_attributes(unit: &LockingUnit) -> Vec<KeyAttribute> {
    merged_attributes(&normalize(unit), unit)
}

fn merged_attributes(r: &Circuit, unit: &LockingUnit) -> Vec<KeyAttribute> {
    let raw = attributes_of(&unit.cone, unit);
    let norm = attributes_of(r, unit);
    raw.into_iter()
        .zip(norm)
        .map(|(a, b)| if a.bit().is_some() { a } else { b })
        .collect()
}

fn attributes_of(r: &Circuit, unit: &LockingUnit) -> Vec<KeyAttribute> {
    let mut entries: Vec<Option<(GateId, EntryGate, NetId)>> = unit
        .key_names
        .iter()
        .map(|n| r.net(n).and_then(|kn| entry_gate(r, kn)))
        .collect();
    let mut gate_use: BTreeMap<GateId, usize> = BTreeMap::new();
    for e in entries.iter().flatten() {
        *gate_use.entry(e.0).or_default() += 1;
    }
    for e in entries.iter_mut() {
        if e.is_some_and(|(g, _, _)| gate_use[&g] > 1) {
            *e = None;
        }
    }
    let mut by_pip: BTreeMap<NetId, Vec<usize>> = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        if let Some((_, _, p)) = e {
            by_pip.entry(*p).or_default().push(i);
        }
    }
    let mut bins: Vec<Option<Bin>> = vec![None; unit.keys.len()];
    for v in by_pip.values() {
        match v.len() {
            1 => bins[v[0]] = Some(Bin::One),
            2 => {
                bins[v[0]] = Some(Bin::One);
                bins[v[1]] = Some(Bin::Two);
            }
            _ => {}
        }
    }
    unit.keys
        .iter()
        .enumerate()
        .map(|(i, k)| match entries[i] {
            Some((g, kind, pip)) => KeyAttribute {
                key: *k,
                pip: Some(r.net_name(pip).to_string()),
                bin: bins[i],
                gate: Some(kind),
                inverted: path_parity(r, r.gate(g).output),
            },
            None => KeyAttribute {
                key: *k,
                pip: None,
                bin: None,
                gate: None,
                inverted: None,
            },
        })
        .collect()
}

/// Primary inputs of the smallest-support net that mixes `key` with inputs.
fn meeting_inputs(r: &Circuit, sup: &SupportMap, key: NetId) -> Vec<usize> {
    let kpos = r.port_index(key).expect("key is a port");
    let ni = r.inputs().len();
    let mask = r.fanout_mask(key);
    let mut best: Option<(usize, Vec<usize>)> = None;
    for n in r.net_ids().filter(|n| mask[n.index()]) {
        let s = &sup.starts[n.index()];
        debug_assert!(s.get(kpos));
        let pis: Vec<usize> = s.iter().filter(|i| *i < ni).collect();
        if pis.is_empty() {
            continue;
        }
        if best.as_ref().is_none_or(|(sz, _)| s.count() < *sz) {
            best = Some((s.count(), pis));
        }
    }
    best.map(|(_, v)| v).unwrap_or_default()
}

/// Structural key bits, the filler bits set to 0, and the bin pairs.
fn structural_key(c: &Circuit, units: &[LockingUnit]) -> (TernaryPattern, Vec<usize>, Vec<(usize, usize)>) {
    let nk = c.key_inputs().len();
    let mut key = TernaryPattern::all_x(nk);
    let mut fillers = Vec::new();
    let mut pairs = Vec::new();
    for u in units {
        let r = normalize(u);
        let attrs = merged_attributes(&r, u);
        for a in &attrs {
            if let Some(b) = a.bit() {
                key.set(a.key, Ternary::from_bool(b));
            }
        }
        let mut by_pip: BTreeMap<Vec<String>, Vec<usize>> = BTreeMap::new();
        for a in &attrs {
            if let Some(p) = &a.pip {
                by_pip.entry(vec![p.clone()]).or_default().push(a.key);
            }
        }
        let sup = SupportMap::compute(&r);
        let mut unknown: BTreeMap<Vec<String>, Vec<usize>> = BTreeMap::new();
        for a in attrs.iter().filter(|a| a.bit().is_none()) {
            let Some(kn) = r.net(&key_name(c, a.key)) else { continue };
            let pis: Vec<String> = meeting_inputs(&r, &sup, kn)
                .into_iter()
                .map(|i| r.net_name(r.inputs()[i]).to_string())
                .collect();
            if a.pip.is_none() {
                by_pip.entry(pis.clone()).or_default().push(a.key);
            }
            unknown.entry(pis).or_default().push(a.key);
        }
        for v in unknown.values() {
            if v.len() == 2 {
                fillers.push(v[1]);
            }
        }
        for v in by_pip.values() {
            if v.len() == 2 {
                pairs.push((v[0].min(v[1]), v[0].max(v[1])));
            }
        }
    }
    pairs.sort();
    (key, fillers, pairs)
}

pub fn attack_non_hard_coded(
    c: &Circuit,
    oracle: Option<&Oracle>,
    opts: &AttackOptions,
) -> Result<AttackOutcome, AttackError> {
    let started = Instant::now();
    let units = extract_locking_units(c)?;
    let anchors: Vec<String> = units.iter().map(|u| u.cn_name.clone()).collect();
    let (key, fillers, pairs) = structural_key(c, &units);
    let mut filled = key.clone();
    for f in &fillers {
        filled.set(*f, Ternary::Zero);
    }
    let res = match finish(c, oracle, filled, Family::KeyGate, anchors.clone(), opts, started) {
        Err(AttackError::Sat(SatError::WrongPartialKey)) if !fillers.is_empty() => {
            finish(c, oracle, key, Family::KeyGate, anchors, opts, started)
        }
        r => r,
    };
    let mut out = res?;
    if let Some(k) = out.key.to_bools() {
        out.mapping = pairs.iter().map(|(a, b)| k[*a] ^ k[*b]).collect();
    }
    Ok(out)
}
