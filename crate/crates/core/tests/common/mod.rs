#![allow(dead_code)]

use psll::atpg::{generate_test_patterns, AtpgOptions, Fault};
use psll::netlist::{Circuit, NetId};
use psll::sim::TernaryPattern;

/// Word-parallel simulation of every net over all 2^ports minterms, with an
/// optional stuck net. Minterm m assigns port i to bit i of m.
pub fn sim_all(c: &Circuit, stuck: Option<(NetId, bool)>) -> Vec<Vec<u64>> {
    let n = c.num_ports();
    let total = 1usize << n;
    let words = total.div_ceil(64);
    let mut v = vec![vec![0u64; words]; c.num_nets()];
    for (i, p) in c.ports().enumerate() {
        for w in 0..words {
            let mut x = 0u64;
            for b in 0..64 {
                let m = w * 64 + b;
                if m < total && (m >> i) & 1 == 1 {
                    x |= 1 << b;
                }
            }
            v[p.index()][w] = x;
        }
    }
    let force = |v: &mut Vec<Vec<u64>>| {
        if let Some((s, val)) = stuck {
            for w in v[s.index()].iter_mut() {
                *w = if val { !0 } else { 0 };
            }
        }
    };
    force(&mut v);
    for g in c.topo_order() {
        let g = c.gate(*g);
        let mut out = vec![0u64; words];
        for (w, o) in out.iter_mut().enumerate() {
            *o = g.kind.eval_words(g.inputs.iter().map(|i| v[i.index()][w]));
        }
        v[g.output.index()] = out;
        if stuck.map(|s| s.0) == Some(g.output) {
            force(&mut v);
        }
    }
    v
}

/// Brute-force detecting set for a fault, as a bitmap over minterms.
pub fn detecting_set(c: &Circuit, fault: Fault) -> Vec<bool> {
    let good = sim_all(c, None);
    let bad = sim_all(c, Some((fault.net, fault.stuck_at)));
    let total = 1usize << c.num_ports();
    (0..total)
        .map(|m| {
            c.outputs()
                .iter()
                .any(|o| (good[o.index()][m / 64] ^ bad[o.index()][m / 64]) >> (m % 64) & 1 == 1)
        })
        .collect()
}

pub fn minterm_index(bits: &[bool]) -> usize {
    bits.iter().enumerate().map(|(i, b)| (*b as usize) << i).sum()
}

/// Checks the emitted cubes against the brute-force set. Returns a
/// description of the first mismatch.
pub fn compare_cubes(c: &Circuit, fault: Fault, cubes: &[TernaryPattern]) -> Result<(), String> {
    let want = detecting_set(c, fault);
    let mut got = vec![0u32; want.len()];
    for cube in cubes {
        for comp in cube.completions() {
            got[minterm_index(&comp)] += 1;
        }
    }
    for m in 0..want.len() {
        if got[m] > 1 {
            return Err(format!("minterm {m} covered {} times", got[m]));
        }
        if (got[m] == 1) != want[m] {
            return Err(format!("minterm {m}: emitted {} brute force {}", got[m], want[m]));
        }
    }
    Ok(())
}

/// Runs full enumeration for every net and both polarities.
pub fn atpg_matches_brute_force(c: &Circuit, opts: &AtpgOptions) -> Result<usize, String> {
    let mut faults = 0;
    for n in c.net_ids() {
        for sa in [false, true] {
            let f = Fault::new(n, sa);
            let r = generate_test_patterns(c, f, opts);
            if !r.complete {
                return Err(format!("{}/{}: incomplete", c.net_name(n), sa as u8));
            }
            compare_cubes(c, f, &r.cubes).map_err(|e| format!("{} s-a-{}: {e}", c.net_name(n), sa as u8))?;
            faults += 1;
        }
    }
    Ok(faults)
}

/// Nets untestable for some stuck-at value; locked netlists should have none.
pub fn untestable_faults(c: &Circuit) -> Vec<String> {
    let mut bad = Vec::new();
    for n in c.net_ids() {
        for sa in [false, true] {
            let r = generate_test_patterns(c, Fault::new(n, sa), &AtpgOptions::new(1));
            if r.cubes.is_empty() {
                bad.push(format!("{} s-a-{}", c.net_name(n), sa as u8));
            }
        }
    }
    bad
}
