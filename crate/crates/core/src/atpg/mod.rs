//! Single stuck-at test generation with don't-cares.
//!
//! [`generate_test_patterns`] returns pairwise-disjoint cubes over the port
//! order (inputs ++ key inputs). Every completion of every cube detects the
//! fault, and when the result is complete the cubes cover the detecting set
//! exactly.

mod count;
mod podem;
mod satgen;

use crate::netlist::{Circuit, NetId};
use crate::sat::{Encoder, Lit};
use crate::sim::{Ternary, TernaryPattern};

pub use crate::sim::Fault;
pub use count::{count_activations, ActivationCount};

/// Decisions allowed to PODEM before handing over to the SAT engine.
pub const DEFAULT_MAX_DECISIONS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    /// PODEM enumeration, falling back to SAT when the decision budget runs out.
    Podem,
    /// SAT model enumeration with lifting and blocking clauses.
    Sat,
}

#[derive(Clone, Debug)]
pub struct AtpgOptions {
    pub max_patterns: usize,
    pub max_decisions: u64,
    pub engine: Engine,
}

impl AtpgOptions {
    pub fn new(max_patterns: usize) -> Self {
        AtpgOptions {
            max_patterns: max_patterns.max(1),
            max_decisions: DEFAULT_MAX_DECISIONS,
            engine: Engine::Podem,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtpgResult {
    pub cubes: Vec<TernaryPattern>,
    /// True when the returned cubes are the entire detecting set.
    pub complete: bool,
    /// True when PODEM ran out of decisions and SAT finished the job.
    pub used_fallback: bool,
}

impl AtpgResult {
    pub fn untestable(&self) -> bool {
        self.complete && self.cubes.is_empty()
    }
}

/// The part of the circuit that matters for one fault.
pub(crate) struct Region {
    pub in_region: Vec<bool>,
    pub in_fanout: Vec<bool>,
    pub outputs: Vec<NetId>,
    /// Port indices inside the region.
    pub ports: Vec<usize>,
}

impl Region {
    pub fn new(c: &Circuit, site: NetId) -> Region {
        let in_fanout = c.fanout_mask(site);
        let outputs: Vec<NetId> = c
            .outputs()
            .iter()
            .copied()
            .filter(|o| in_fanout[o.index()])
            .collect();
        let mut in_region = vec![false; c.num_nets()];
        for o in &outputs {
            for (i, b) in c.fanin_mask(*o).into_iter().enumerate() {
                in_region[i] |= b;
            }
        }
        let ports = c
            .ports()
            .enumerate()
            .filter(|(_, p)| in_region[p.index()])
            .map(|(i, _)| i)
            .collect();
        Region {
            in_region,
            in_fanout,
            outputs,
            ports,
        }
    }
}

/// Good/faulty miter used to prove that a cube detects for every completion.
pub(crate) struct DetectChecker {
    pub enc: Encoder,
    pub port_lits: Vec<Lit>,
    /// True when good and faulty outputs all agree.
    pub undetected: Lit,
    /// True when some output differs.
    pub detected: Lit,
}

impl DetectChecker {
    pub fn new(c: &Circuit, fault: Fault, region: &Region) -> Self {
        let mut enc = Encoder::new();
        let port_lits = enc.fresh_ports(c.num_ports());
        let good = enc.encode_circuit(c, &port_lits, Some(&region.in_region));
        let mut bad = good.clone();
        bad[fault.net.index()] = enc.constant(fault.stuck_at);
        let mut buf = Vec::new();
        for g in c.topo_order() {
            let g = c.gate(*g);
            let o = g.output.index();
            if !region.in_fanout[o] || g.output == fault.net {
                continue;
            }
            buf.clear();
            buf.extend(g.inputs.iter().map(|i| bad[i.index()]));
            bad[o] = enc.gate(g.kind, &buf);
        }
        let diffs: Vec<Lit> = region
            .outputs
            .iter()
            .map(|o| enc.xor(good[o.index()], bad[o.index()]))
            .collect();
        let detected = enc.or(&diffs);
        DetectChecker {
            enc,
            port_lits,
            undetected: !detected,
            detected,
        }
    }

    fn cube_assumptions(&self, cube: &TernaryPattern) -> Vec<Lit> {
        cube.0
            .iter()
            .enumerate()
            .filter_map(|(i, t)| {
                t.to_bool()
                    .map(|v| if v { self.port_lits[i] } else { !self.port_lits[i] })
            })
            .collect()
    }

    /// True iff every completion of `cube` detects the fault.
    pub fn detects_all(&mut self, cube: &TernaryPattern) -> bool {
        if self.enc.as_const(self.undetected) == Some(false) {
            return true;
        }
        if self.enc.as_const(self.undetected) == Some(true) {
            return false;
        }
        let mut a = self.cube_assumptions(cube);
        a.push(self.undetected);
        self.enc.solve(&a) == crate::sat::SatResult::Unsat
    }

    /// Raises specified bits to x one at a time, in port order, while every
    /// completion still detects and no emitted cube is intersected.
    pub fn lift(&mut self, cube: &TernaryPattern, emitted: &[TernaryPattern]) -> TernaryPattern {
        let mut cur = cube.clone();
        for i in 0..cur.width() {
            let v = cur.get(i);
            if v.is_x() {
                continue;
            }
            cur.set(i, Ternary::X);
            let ok = !emitted.iter().any(|e| e.intersects(&cur)) && self.detects_all(&cur);
            if !ok {
                cur.set(i, v);
            }
        }
        cur
    }
}

/// Disjoint sharp: cubes covering `c` minus `e`, pairwise disjoint.
pub(crate) fn sharp(c: &TernaryPattern, e: &TernaryPattern) -> Vec<TernaryPattern> {
    if !c.intersects(e) {
        return vec![c.clone()];
    }
    let mut out = Vec::new();
    let mut cur = c.clone();
    for i in 0..c.width() {
        if let Some(ev) = e.get(i).to_bool() {
            if cur.get(i).is_x() {
                let mut piece = cur.clone();
                piece.set(i, Ternary::from_bool(!ev));
                out.push(piece);
                cur.set(i, Ternary::from_bool(ev));
            }
        }
    }
    out
}

/// Cubes of `c` with every emitted cube removed.
pub(crate) fn subtract_all(c: &TernaryPattern, emitted: &[TernaryPattern]) -> Vec<TernaryPattern> {
    let mut pieces = vec![c.clone()];
    for e in emitted {
        pieces = pieces.iter().flat_map(|p| sharp(p, e)).collect();
        if pieces.is_empty() {
            break;
        }
    }
    pieces
}

/// Generates up to `opts.max_patterns` disjoint, maximally lifted detecting
/// cubes for `fault`.
pub fn generate_test_patterns(c: &Circuit, fault: Fault, opts: &AtpgOptions) -> AtpgResult {
    let region = Region::new(c, fault.net);
    if region.outputs.is_empty() {
        return AtpgResult {
            cubes: Vec::new(),
            complete: true,
            used_fallback: false,
        };
    }
    let mut checker = DetectChecker::new(c, fault, &region);
    if checker.enc.as_const(checker.detected) == Some(false) {
        return AtpgResult {
            cubes: Vec::new(),
            complete: true,
            used_fallback: false,
        };
    }
    match opts.engine {
        Engine::Sat => {
            let (cubes, complete) = satgen::enumerate(&mut checker, &region.ports, c.num_ports(), Vec::new(), opts.max_patterns);
            AtpgResult {
                cubes,
                complete,
                used_fallback: false,
            }
        }
        Engine::Podem => {
            let out = podem::enumerate(c, fault, &region, &mut checker, opts);
            if out.budget_exhausted {
                let (cubes, complete) =
                    satgen::enumerate(&mut checker, &region.ports, c.num_ports(), out.cubes, opts.max_patterns);
                AtpgResult {
                    cubes,
                    complete,
                    used_fallback: true,
                }
            } else {
                AtpgResult {
                    cubes: out.cubes,
                    complete: out.complete,
                    used_fallback: false,
                }
            }
        }
    }
}

/// One cube per line, characters `0`, `1`, `x`.
pub fn dump_patterns(cubes: &[TernaryPattern]) -> String {
    let mut s = String::new();
    for c in cubes {
        s.push_str(&c.to_string());
        s.push('\n');
    }
    s
}
