//! Key recovery for hard-coded point-function locking: find a net that only
//! the protected patterns activate, test it, and read the key off the cubes.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use super::{finish, AttackError, AttackOptions, AttackOutcome};
use crate::atpg::{count_activations, generate_test_patterns, ActivationCount, AtpgOptions, Fault};
use crate::lock::Family;
use crate::netlist::{Bitset, Circuit, GateKind, NetId, SupportMap};
use crate::sat::SatError;
use crate::sim::{Ternary, TernaryPattern};

/// Key input paired with the input it is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyPair {
    pub pip: NetId,
    /// Topmost net whose support is exactly this key and its input.
    pub comparator: NetId,
    /// Key bit = pattern bit xor this, when the comparator profile is known.
    pub offset: Option<bool>,
}

/// Key index to comparator pairing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyInputMap {
    pub pairs: BTreeMap<usize, KeyPair>,
}

impl KeyInputMap {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pips(&self) -> Vec<NetId> {
        let mut v: Vec<NetId> = self.pairs.values().map(|p| p.pip).collect();
        v.sort();
        v.dedup();
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtractionMode {
    /// The net reads only mapped inputs; key bits come through the map.
    ViaPip,
    /// The net reads only key inputs; key bits are read directly.
    Direct,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateNet {
    pub net: NetId,
    pub mode: ExtractionMode,
    pub pip_coverage: usize,
    pub depth: u32,
    pub activation_count: ActivationCount,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeResult {
    pub stuck_at: bool,
    pub cubes: Vec<TernaryPattern>,
}

/// POPs (outputs reached by any key input) and every net feeding them,
/// ports first, then gates in topological order.
pub fn extract_nets(c: &Circuit, sup: &SupportMap) -> (Vec<NetId>, Vec<NetId>) {
    let mut pop_bits = Bitset::new(c.outputs().len());
    for k in c.key_inputs() {
        pop_bits.union_with(&sup.ends[k.index()]);
    }
    let pops: Vec<NetId> = pop_bits.iter().map(|i| c.outputs()[i]).collect();
    let mut mask = vec![false; c.num_nets()];
    for p in &pops {
        for (i, b) in c.fanin_mask(*p).into_iter().enumerate() {
            mask[i] |= b;
        }
    }
    let mut nets: Vec<NetId> = c.ports().filter(|p| mask[p.index()]).collect();
    nets.extend(
        c.topo_order()
            .iter()
            .map(|g| c.gate(*g).output)
            .filter(|n| mask[n.index()]),
    );
    (pops, nets)
}

fn comparator_offset(c: &Circuit, net: NetId, pip: NetId, key: NetId) -> Option<bool> {
    const X: u64 = 0b1010;
    const K: u64 = 0b1100;
    let mut vals: BTreeMap<NetId, u64> = BTreeMap::new();
    vals.insert(pip, X);
    vals.insert(key, K);
    for g in c.cone_gates(net) {
        let g = c.gate(g);
        let v = g.kind.eval_words(g.inputs.iter().map(|i| vals[i]));
        vals.insert(g.output, v);
    }
    let f = vals[&net] & 0xf;
    let eq = !(X ^ K) & 0xf;
    let xnor_like = if f == eq {
        true
    } else if f == !eq & 0xf {
        false
    } else {
        return None;
    };
    let fo = c.fanout(net);
    if fo.len() != 1 || c.gate(fo[0]).inputs.len() < 2 {
        return None;
    }
    let req = match c.gate(fo[0]).kind {
        GateKind::And | GateKind::Nand => true,
        GateKind::Or | GateKind::Nor => false,
        _ => return None,
    };
    Some(req ^ xnor_like)
}

/// Pairs each key input with the one primary input it meets in a
/// two-startpoint net. Keys that meet several inputs are left out.
pub fn key_input_mapping(c: &Circuit, sup: &SupportMap, nets: &[NetId]) -> KeyInputMap {
    let ni = c.inputs().len();
    let mut seen: BTreeMap<usize, Vec<(usize, NetId)>> = BTreeMap::new();
    for &n in nets {
        if c.driver(n).is_none() {
            continue;
        }
        let s = &sup.starts[n.index()];
        if s.count() != 2 {
            continue;
        }
        let idx: Vec<usize> = s.iter().collect();
        if idx[0] < ni && idx[1] >= ni {
            seen.entry(idx[1] - ni).or_default().push((idx[0], n));
        }
    }
    let mut map = KeyInputMap::default();
    for (k, v) in seen {
        let pi = v[0].0;
        if v.iter().any(|(p, _)| *p != pi) {
            continue;
        }
        let comparator = v.iter().map(|(_, n)| *n).max_by_key(|n| c.level(*n)).unwrap();
        let pip = c.inputs()[pi];
        map.pairs.insert(
            k,
            KeyPair {
                pip,
                comparator,
                offset: comparator_offset(c, comparator, pip, c.key_inputs()[k]),
            },
        );
    }
    map
}

/// Nets that only reach POPs and read only mapped inputs (or only key
/// inputs), covering more than half a protected pattern. Ordered by
/// coverage, then depth, both descending.
pub fn candidate_nets(
    c: &Circuit,
    sup: &SupportMap,
    nets: &[NetId],
    pops: &[NetId],
    map: &KeyInputMap,
    num_pp: usize,
) -> Vec<CandidateNet> {
    let ni = c.inputs().len();
    let nk = c.key_inputs().len();
    let pp_len = nk / num_pp.max(1);
    let mut pip_mask = Bitset::new(c.num_ports());
    for p in map.pips() {
        pip_mask.set(c.port_index(p).expect("pip is a port"));
    }
    let mut key_mask = Bitset::new(c.num_ports());
    for i in ni..ni + nk {
        key_mask.set(i);
    }
    let mut pop_mask = Bitset::new(c.outputs().len());
    for (i, o) in c.outputs().iter().enumerate() {
        if pops.contains(o) {
            pop_mask.set(i);
        }
    }
    let limit = num_pp as u128 + 1;
    let mut out: Vec<CandidateNet> = nets
        .iter()
        .filter(|n| c.driver(**n).is_some() && sup.ends[n.index()].is_subset(&pop_mask))
        .filter_map(|&n| {
            let s = &sup.starts[n.index()];
            let mode = if !map.is_empty() && s.is_subset(&pip_mask) {
                ExtractionMode::ViaPip
            } else if s.is_subset(&key_mask) {
                ExtractionMode::Direct
            } else {
                return None;
            };
            let cov = s.count();
            (2 * cov > pp_len).then_some((n, mode, cov))
        })
        .map(|(net, mode, cov)| CandidateNet {
            net,
            mode,
            pip_coverage: cov,
            depth: c.level(net),
            activation_count: count_activations(c, net, true, limit),
        })
        .collect();
    out.sort_by(|a, b| b.pip_coverage.cmp(&a.pip_coverage).then(b.depth.cmp(&a.depth)));
    out
}

/// True when some net passes the structural candidate filters.
pub(crate) fn has_candidates(c: &Circuit, num_pp: usize) -> Result<bool, AttackError> {
    let sup = SupportMap::compute(c);
    let (pops, nets) = extract_nets(c, &sup);
    let map = key_input_mapping(c, &sup, &nets);
    Ok(!candidate_nets(c, &sup, &nets, &pops, &map, num_pp).is_empty())
}

/// Tests both stuck-at faults on the net; accepts a polarity whose complete
/// detecting set has exactly `num_pp` cubes, stuck-at-0 first.
pub fn probe(c: &Circuit, net: NetId, num_pp: usize) -> Option<ProbeResult> {
    for stuck_at in [false, true] {
        let r = generate_test_patterns(c, Fault::new(net, stuck_at), &AtpgOptions::new(num_pp + 1));
        if r.complete && r.cubes.len() == num_pp {
            return Some(ProbeResult { stuck_at, cubes: r.cubes });
        }
    }
    None
}

fn merge(values: impl Iterator<Item = Ternary>) -> Ternary {
    let mut acc = Ternary::X;
    for v in values {
        match (acc.to_bool(), v.to_bool()) {
            (_, None) => {}
            (None, Some(_)) => acc = v,
            (Some(a), Some(b)) if a != b => return Ternary::X,
            _ => {}
        }
    }
    acc
}

fn shift(v: Ternary, offset: Option<bool>) -> Ternary {
    match (v.to_bool(), offset) {
        (Some(b), Some(o)) => Ternary::from_bool(b ^ o),
        _ => Ternary::X,
    }
}

/// Reads key bits from test cubes over the full port list. With several
/// patterns and a regular map (every PIP compared against `num_pp` keys),
/// the r-th key on each PIP takes its bit from cube r. Otherwise bits are
/// merged across cubes and conflicts become x.
pub fn key_extraction(
    c: &Circuit,
    cubes: &[TernaryPattern],
    map: &KeyInputMap,
    mode: ExtractionMode,
    num_pp: usize,
) -> TernaryPattern {
    let ni = c.inputs().len();
    let nk = c.key_inputs().len();
    let mut key = TernaryPattern::all_x(nk);
    match mode {
        ExtractionMode::Direct => {
            for i in 0..nk {
                key.set(i, merge(cubes.iter().map(|t| t.get(ni + i))));
            }
        }
        ExtractionMode::ViaPip => {
            let mut by_pip: BTreeMap<NetId, Vec<usize>> = BTreeMap::new();
            for (k, p) in &map.pairs {
                by_pip.entry(p.pip).or_default().push(*k);
            }
            let words = num_pp > 1 && cubes.len() == num_pp && by_pip.values().all(|v| v.len() == num_pp);
            for (k, p) in &map.pairs {
                let pos = c.port_index(p.pip).expect("pip is a port");
                let v = if words {
                    let rank = by_pip[&p.pip].iter().position(|x| x == k).unwrap();
                    cubes[rank].get(pos)
                } else {
                    merge(cubes.iter().map(|t| t.get(pos)))
                };
                key.set(*k, shift(v, p.offset));
            }
        }
    }
    key
}

pub fn attack_hard_coded(
    c: &Circuit,
    oracle: Option<&crate::sim::Oracle>,
    opts: &AttackOptions,
) -> Result<AttackOutcome, AttackError> {
    let started = Instant::now();
    let nk = c.key_inputs().len();
    if nk == 0 {
        return Err(AttackError::NoKeyInputs);
    }
    let num_pp = opts.num_pp.max(1);
    let sup = SupportMap::compute(c);
    let (pops, nets) = extract_nets(c, &sup);
    let map = key_input_mapping(c, &sup, &nets);
    let cands = candidate_nets(c, &sup, &nets, &pops, &map, num_pp);
    let width = rayon::current_num_threads().max(1);
    let mut tried = 0;
    for chunk in cands.chunks(width) {
        let probes: Vec<Option<ProbeResult>> = chunk.par_iter().map(|cd| probe(c, cd.net, num_pp)).collect();
        for (cd, p) in chunk.iter().zip(probes) {
            tried += 1;
            let Some(p) = p else { continue };
            let key = key_extraction(c, &p.cubes, &map, cd.mode, num_pp);
            if key.count_x() == nk {
                continue;
            }
            let anchors = vec![c.net_name(cd.net).to_string()];
            match finish(c, oracle, key, Family::HardCoded, anchors, opts, started) {
                Ok(o) => return Ok(o),
                Err(AttackError::Sat(SatError::WrongPartialKey)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Err(AttackError::ExhaustedCandidates { tried })
}
