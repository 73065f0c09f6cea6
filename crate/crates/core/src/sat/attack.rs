use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cnf::Encoder;
use super::solver::{Lit, SatResult};
use super::SatError;
use crate::netlist::{Circuit, NetId};
use crate::resynth::tie_ports;
use crate::sim::{eval, Oracle, Ternary, TernaryPattern};

/// Replaces the 0/1 bits of `key` with constants and simplifies; x bits stay
/// as key inputs.
pub fn substitute_key(c: &Circuit, key: &TernaryPattern) -> Result<Circuit, SatError> {
    if key.width() != c.key_inputs().len() {
        return Err(SatError::KeyWidth {
            expected: c.key_inputs().len(),
            got: key.width(),
        });
    }
    let consts: HashMap<NetId, bool> = c
        .key_inputs()
        .iter()
        .zip(&key.0)
        .filter_map(|(k, t)| t.to_bool().map(|b| (*k, b)))
        .collect();
    Ok(tie_ports(c, &consts))
}

/// Every oracle query made by the attack, in order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DipTrace {
    pub dips: Vec<(TernaryPattern, TernaryPattern)>,
}

impl DipTrace {
    pub fn iterations(&self) -> usize {
        self.dips.len()
    }
}

#[derive(Clone, Debug)]
pub struct SatAttackOptions {
    /// Stop with an error after this many DIPs.
    pub max_dips: Option<usize>,
    /// Per-solve conflict limit.
    pub conflict_budget: Option<u64>,
    /// Random oracle queries used to validate the final key; a mismatch is
    /// added as a constraint and the loop resumes.
    pub validation_queries: usize,
}

impl Default for SatAttackOptions {
    fn default() -> Self {
        Self::new()
    }
}

impl SatAttackOptions {
    pub fn new() -> Self {
        SatAttackOptions {
            max_dips: None,
            conflict_budget: None,
            validation_queries: 32,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SatAttackOutcome {
    pub key: Vec<bool>,
    pub trace: DipTrace,
}

struct Miter<'a> {
    c: &'a Circuit,
    enc: Encoder,
    x: Vec<Lit>,
    ka: Vec<Lit>,
    kb: Vec<Lit>,
    /// Outputs that depend on the key, as indices into `c.outputs()`.
    keyed_outputs: Vec<usize>,
    /// Nets that can influence a keyed output.
    mask: Vec<bool>,
    oracle_pos: Vec<usize>,
}

impl<'a> Miter<'a> {
    fn ports(&self, x: &[Lit], k: &[Lit]) -> Vec<Lit> {
        x.iter().chain(k.iter()).copied().collect()
    }

    /// Adds C(dip, K) == response for both key copies.
    fn constrain(&mut self, dip: &[bool], resp: &[bool]) {
        let xs: Vec<Lit> = dip.iter().map(|b| self.enc.constant(*b)).collect();
        for copy in 0..2 {
            let k = if copy == 0 { self.ka.clone() } else { self.kb.clone() };
            let ports = self.ports(&xs, &k);
            let nets = self.enc.encode_circuit(self.c, &ports, Some(&self.mask));
            for &oi in &self.keyed_outputs {
                let l = nets[self.c.outputs()[oi].index()];
                let want = resp[self.oracle_pos[oi]];
                self.enc.add_clause(&[if want { l } else { !l }]);
            }
        }
    }
}

/// Oracle-guided key recovery with the distinguishing-input loop. The 0/1
/// bits of `partial` are taken as fixed. The returned key agrees with the
/// oracle on every input once no distinguishing input remains. Free key bits
/// that are not determined are resolved greedily, preferring 1 in key order.
pub fn sat_attack(
    locked: &Circuit,
    oracle: &Oracle,
    partial: &TernaryPattern,
    opts: &SatAttackOptions,
) -> Result<SatAttackOutcome, SatError> {
    let nk = locked.key_inputs().len();
    if partial.width() != nk {
        return Err(SatError::KeyWidth {
            expected: nk,
            got: partial.width(),
        });
    }
    if oracle.num_inputs() != locked.inputs().len() {
        return Err(SatError::Oracle(format!(
            "oracle has {} inputs, locked circuit {}",
            oracle.num_inputs(),
            locked.inputs().len()
        )));
    }
    let onames = oracle.output_names();
    let oracle_pos: Vec<usize> = locked
        .outputs()
        .iter()
        .enumerate()
        .map(|(i, o)| {
            onames
                .iter()
                .position(|n| n == locked.net_name(*o))
                .unwrap_or(i)
        })
        .collect();

    let mut key_fanout = vec![false; locked.num_nets()];
    for k in locked.key_inputs() {
        for (i, b) in locked.fanout_mask(*k).into_iter().enumerate() {
            key_fanout[i] |= b;
        }
    }
    let keyed_outputs: Vec<usize> = (0..locked.outputs().len())
        .filter(|i| key_fanout[locked.outputs()[*i].index()])
        .collect();
    let mut mask = vec![false; locked.num_nets()];
    for &oi in &keyed_outputs {
        for (i, b) in locked.fanin_mask(locked.outputs()[oi]).into_iter().enumerate() {
            mask[i] |= b;
        }
    }

    let mut enc = Encoder::new();
    enc.solver.set_conflict_budget(opts.conflict_budget);
    let x = enc.fresh_ports(locked.inputs().len());
    let ka = enc.fresh_ports(nk);
    let kb = enc.fresh_ports(nk);
    for (i, t) in partial.0.iter().enumerate() {
        if let Some(v) = t.to_bool() {
            enc.add_clause(&[if v { ka[i] } else { !ka[i] }]);
            enc.add_clause(&[if v { kb[i] } else { !kb[i] }]);
        }
    }
    let mut m = Miter {
        c: locked,
        enc,
        x,
        ka,
        kb,
        keyed_outputs,
        mask,
        oracle_pos,
    };
    let pa = m.ports(&m.x.clone(), &m.ka.clone());
    let pb = m.ports(&m.x.clone(), &m.kb.clone());
    let na = m.enc.encode_circuit(locked, &pa, Some(&m.mask));
    let nb = m.enc.encode_circuit(locked, &pb, Some(&m.mask));
    let diffs: Vec<Lit> = m
        .keyed_outputs
        .iter()
        .map(|oi| {
            let o = locked.outputs()[*oi].index();
            (na[o], nb[o])
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|(a, b)| m.enc.xor(a, b))
        .collect();
    let diff = m.enc.or(&diffs);
    let act = m.enc.new_var().pos();
    m.enc.add_clause(&[!act, diff]);

    let mut trace = DipTrace::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1b);
    loop {
        loop {
            match m.enc.solve(&[act]) {
                SatResult::Unknown => return Err(SatError::Budget),
                SatResult::Unsat => break,
                SatResult::Sat => {}
            }
            if let Some(max) = opts.max_dips {
                if trace.iterations() >= max {
                    return Err(SatError::DipBudget(max));
                }
            }
            let dip: Vec<bool> = m.x.iter().map(|l| m.enc.value(*l)).collect();
            let resp = oracle
                .query(&dip)
                .map_err(|e| SatError::Oracle(e.to_string()))?;
            m.constrain(&dip, &resp);
            trace.dips.push((TernaryPattern::from_bools(&dip), TernaryPattern::from_bools(&resp)));
        }
        let key = pick_key(&mut m, partial)?;
        let mut clean = true;
        for _ in 0..opts.validation_queries {
            let pat: Vec<bool> = (0..locked.inputs().len()).map(|_| rng.gen()).collect();
            let resp = oracle
                .query(&pat)
                .map_err(|e| SatError::Oracle(e.to_string()))?;
            let mut full = pat.clone();
            full.extend_from_slice(&key);
            let got = eval(locked, &full).map_err(|e| SatError::Oracle(e.to_string()))?;
            if (0..got.len()).any(|i| got[i] != resp[m.oracle_pos[i]]) {
                m.constrain(&pat, &resp);
                clean = false;
                break;
            }
        }
        if clean {
            return Ok(SatAttackOutcome { key, trace });
        }
    }
}

fn pick_key(m: &mut Miter<'_>, partial: &TernaryPattern) -> Result<Vec<bool>, SatError> {
    let nk = m.ka.len();
    // Any key consistent with all observations is correct; pick one greedily.
    let mut fixed: Vec<Lit> = Vec::new();
    match m.enc.solve(&[]) {
        SatResult::Unsat => return Err(SatError::WrongPartialKey),
        SatResult::Unknown => return Err(SatError::Budget),
        SatResult::Sat => {}
    }
    let mut key = vec![false; nk];
    for i in 0..nk {
        if let Some(v) = partial.get(i).to_bool() {
            key[i] = v;
            fixed.push(if v { m.ka[i] } else { !m.ka[i] });
            continue;
        }
        let mut trial = fixed.clone();
        trial.push(m.ka[i]);
        let v = match m.enc.solve(&trial) {
            SatResult::Sat => true,
            SatResult::Unsat => false,
            SatResult::Unknown => return Err(SatError::Budget),
        };
        key[i] = v;
        fixed.push(if v { m.ka[i] } else { !m.ka[i] });
    }
    Ok(key)
}

/// Merges a binary key into the x positions of a partial key.
pub fn complete_partial(partial: &TernaryPattern, key: &[bool]) -> TernaryPattern {
    TernaryPattern(
        partial
            .0
            .iter()
            .zip(key)
            .map(|(t, b)| match t {
                Ternary::X => Ternary::from_bool(*b),
                v => *v,
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_bench;
    use crate::sat::check_equivalence;

    #[test]
    fn one_xor_key_bit() {
        let orig = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)").unwrap();
        let locked = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(keyinput0)\nOUTPUT(y)\nt = AND(a, b)\ny = XNOR(t, keyinput0)",
        )
        .unwrap();
        let oracle = Oracle::new(orig.clone());
        let out = sat_attack(&locked, &oracle, &TernaryPattern::all_x(1), &Default::default()).unwrap();
        assert_eq!(out.key, vec![true]);
        assert_eq!(out.trace.iterations(), 1);
        let unlocked = substitute_key(&locked, &TernaryPattern::from_bools(&out.key)).unwrap();
        assert!(check_equivalence(&orig, &unlocked).unwrap().is_equivalent());
    }

    #[test]
    fn wrong_partial_detected() {
        let orig = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)").unwrap();
        let locked = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(keyinput0)\nOUTPUT(y)\nt = AND(a, b)\ny = XNOR(t, keyinput0)",
        )
        .unwrap();
        let oracle = Oracle::new(orig);
        let partial: TernaryPattern = "0".parse().unwrap();
        let e = sat_attack(&locked, &oracle, &partial, &Default::default()).unwrap_err();
        assert_eq!(e, SatError::WrongPartialKey);
    }
}
