//! Lightweight logic resynthesis: sweeping, standard-gate remapping, cone
//! flattening and an external-tool bridge.

use std::collections::{HashMap, HashSet};
use std::process::Command;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{emit_bench, parse_bench, Circuit, CircuitBuilder, GateKind, NetId, NetlistError};
use crate::sat::{check_equivalence, Equivalence, SatError};
use crate::sim::eval_words;

#[derive(Debug, Error)]
pub enum ResynthError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error("external tool unavailable: {0}")]
    ToolMissing(String),
    #[error("external tool failed: {0}")]
    ToolFailed(String),
    #[error("external tool changed the circuit function")]
    NotEquivalent,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Most inputs a cone may have to be collapsed to two-level form.
pub const FLATTEN_MAX_INPUTS: usize = 24;
/// Largest cover emitted by flattening; bigger covers keep the original logic.
pub const FLATTEN_MAX_CUBES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sig {
    Const(bool),
    Node(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum NodeKind {
    Port(usize),
    Gate(GateKind, Vec<usize>),
}

struct Net {
    nodes: Vec<NodeKind>,
    names: Vec<Option<String>>,
    strash: HashMap<NodeKind, usize>,
}

fn inverse_kind(k: GateKind) -> Option<GateKind> {
    Some(match k {
        GateKind::And => GateKind::Nand,
        GateKind::Nand => GateKind::And,
        GateKind::Or => GateKind::Nor,
        GateKind::Nor => GateKind::Or,
        GateKind::Xor => GateKind::Xnor,
        GateKind::Xnor => GateKind::Xor,
        _ => return None,
    })
}

impl Net {
    fn node(&mut self, k: NodeKind, name: Option<&str>) -> usize {
        if let Some(i) = self.strash.get(&k) {
            return *i;
        }
        let i = self.nodes.len();
        self.nodes.push(k.clone());
        self.names.push(name.map(str::to_string));
        self.strash.insert(k, i);
        i
    }

    fn complement(&self, x: usize) -> Option<usize> {
        match &self.nodes[x] {
            NodeKind::Gate(GateKind::Inv, ins) => Some(ins[0]),
            NodeKind::Gate(k, ins) => {
                let inv = inverse_kind(*k)?;
                self.strash.get(&NodeKind::Gate(inv, ins.clone())).copied().or_else(|| {
                    self.strash.get(&NodeKind::Gate(GateKind::Inv, vec![x])).copied()
                })
            }
            NodeKind::Port(_) => self.strash.get(&NodeKind::Gate(GateKind::Inv, vec![x])).copied(),
        }
    }

    fn inv(&mut self, s: Sig, name: Option<&str>) -> Sig {
        match s {
            Sig::Const(b) => Sig::Const(!b),
            Sig::Node(x) => match self.nodes[x].clone() {
                NodeKind::Gate(GateKind::Inv, ins) => Sig::Node(ins[0]),
                NodeKind::Gate(k, ins) if inverse_kind(k).is_some() => {
                    Sig::Node(self.node(NodeKind::Gate(inverse_kind(k).unwrap(), ins), name))
                }
                _ => Sig::Node(self.node(NodeKind::Gate(GateKind::Inv, vec![x]), name)),
            },
        }
    }

    fn build(&mut self, kind: GateKind, ins: &[Sig], name: Option<&str>) -> Sig {
        match kind {
            GateKind::Const0 => Sig::Const(false),
            GateKind::Const1 => Sig::Const(true),
            GateKind::Buf => ins[0],
            GateKind::Inv => self.inv(ins[0], name),
            GateKind::Xor | GateKind::Xnor => {
                let mut parity = kind == GateKind::Xnor;
                let mut nodes = Vec::new();
                for s in ins {
                    match s {
                        Sig::Const(b) => parity ^= b,
                        Sig::Node(x) => {
                            // Pull inverters into the parity.
                            if let NodeKind::Gate(GateKind::Inv, i) = &self.nodes[*x] {
                                parity = !parity;
                                nodes.push(i[0]);
                            } else {
                                nodes.push(*x);
                            }
                        }
                    }
                }
                nodes.sort();
                let mut reduced: Vec<usize> = Vec::new();
                for x in nodes {
                    if reduced.last() == Some(&x) {
                        reduced.pop();
                    } else {
                        reduced.push(x);
                    }
                }
                if reduced.len() == 2 && self.complement(reduced[0]) == Some(reduced[1]) {
                    return Sig::Const(!parity);
                }
                match reduced.len() {
                    0 => Sig::Const(parity),
                    1 => {
                        if parity {
                            self.inv(Sig::Node(reduced[0]), name)
                        } else {
                            Sig::Node(reduced[0])
                        }
                    }
                    _ => {
                        let k = if parity { GateKind::Xnor } else { GateKind::Xor };
                        let mut acc = reduced[0];
                        for (i, x) in reduced[1..].iter().enumerate() {
                            let last = i + 2 == reduced.len();
                            let kk = if last { k } else { GateKind::Xor };
                            let mut pair = vec![acc, *x];
                            pair.sort();
                            acc = self.node(NodeKind::Gate(kk, pair), if last { name } else { None });
                        }
                        Sig::Node(acc)
                    }
                }
            }
            GateKind::And | GateKind::Nand | GateKind::Or | GateKind::Nor => {
                let is_and = matches!(kind, GateKind::And | GateKind::Nand);
                let out_inv = matches!(kind, GateKind::Nand | GateKind::Nor);
                let cv = !is_and;
                let mut nodes = Vec::new();
                for s in ins {
                    match s {
                        Sig::Const(b) if *b == cv => return Sig::Const(cv ^ out_inv),
                        Sig::Const(_) => {}
                        Sig::Node(x) => nodes.push(*x),
                    }
                }
                nodes.sort();
                nodes.dedup();
                for x in &nodes {
                    if let Some(c) = self.complement(*x) {
                        if nodes.binary_search(&c).is_ok() {
                            return Sig::Const(cv ^ out_inv);
                        }
                    }
                }
                match nodes.len() {
                    0 => Sig::Const(!cv ^ out_inv),
                    1 => {
                        if out_inv {
                            self.inv(Sig::Node(nodes[0]), name)
                        } else {
                            Sig::Node(nodes[0])
                        }
                    }
                    _ => Sig::Node(self.node(NodeKind::Gate(kind, nodes), name)),
                }
            }
        }
    }
}

/// Sweeps `c` once, treating the ports in `consts` as constants (they are
/// dropped from the port list).
fn sweep_once(c: &Circuit, consts: &HashMap<NetId, bool>) -> Result<Circuit, NetlistError> {
    let mut net = Net {
        nodes: Vec::new(),
        names: Vec::new(),
        strash: HashMap::new(),
    };
    let mut sig = vec![Sig::Const(false); c.num_nets()];
    let mut port_names = Vec::new();
    for (i, p) in c.ports().enumerate() {
        if let Some(v) = consts.get(&p) {
            sig[p.index()] = Sig::Const(*v);
        } else {
            let n = net.node(NodeKind::Port(i), Some(c.net_name(p)));
            port_names.push(c.net_name(p).to_string());
            sig[p.index()] = Sig::Node(n);
        }
    }
    for g in c.topo_order() {
        let g = c.gate(*g);
        let ins: Vec<Sig> = g.inputs.iter().map(|i| sig[i.index()]).collect();
        sig[g.output.index()] = net.build(g.kind, &ins, Some(c.net_name(g.output)));
    }

    // Live nodes: reachable from outputs.
    let mut live = vec![false; net.nodes.len()];
    let mut stack: Vec<usize> = c
        .outputs()
        .iter()
        .filter_map(|o| match sig[o.index()] {
            Sig::Node(x) => Some(x),
            Sig::Const(_) => None,
        })
        .collect();
    while let Some(x) = stack.pop() {
        if live[x] {
            continue;
        }
        live[x] = true;
        if let NodeKind::Gate(_, ins) = &net.nodes[x] {
            stack.extend(ins.iter().copied());
        }
    }

    // Names: ports keep theirs, outputs claim their driver node, others keep
    // an original name when free.
    let mut used: HashSet<String> = port_names.iter().cloned().collect();
    for o in c.outputs() {
        used.insert(c.net_name(*o).to_string());
    }
    let mut final_name: Vec<Option<String>> = vec![None; net.nodes.len()];
    for (i, k) in net.nodes.iter().enumerate() {
        if matches!(k, NodeKind::Port(_)) {
            final_name[i] = net.names[i].clone();
        }
    }
    let mut buffered: Vec<(String, Sig)> = Vec::new();
    for o in c.outputs() {
        let oname = c.net_name(*o).to_string();
        match sig[o.index()] {
            Sig::Node(x) if final_name[x].is_none() => final_name[x] = Some(oname),
            s => buffered.push((oname, s)),
        }
    }
    let mut fresh = 0usize;
    let mut b = CircuitBuilder::new(c.name());
    for p in &port_names {
        b.add_input(p);
    }
    for (i, k) in net.nodes.iter().enumerate() {
        if !live[i] || final_name[i].is_some() {
            continue;
        }
        let cand = net.names[i].clone().filter(|n| !used.contains(n));
        let name = match cand {
            Some(n) => n,
            None => loop {
                let n = format!("_s{fresh}");
                fresh += 1;
                if !used.contains(&n) && c.net(&n).is_none() {
                    break n;
                }
            },
        };
        used.insert(name.clone());
        final_name[i] = Some(name);
        let _ = k;
    }
    for (i, k) in net.nodes.iter().enumerate() {
        if !live[i] {
            continue;
        }
        if let NodeKind::Gate(kind, ins) = k {
            let ins: Vec<&str> = ins
                .iter()
                .map(|x| final_name[*x].as_deref().unwrap())
                .collect();
            b.add_gate(*kind, final_name[i].as_deref().unwrap(), &ins);
        }
    }
    for (oname, s) in &buffered {
        match s {
            Sig::Const(v) => {
                let k = if *v { GateKind::Const1 } else { GateKind::Const0 };
                b.add_gate::<&str>(k, oname, &[]);
            }
            Sig::Node(x) => {
                b.add_gate(GateKind::Buf, oname, &[final_name[*x].as_deref().unwrap()]);
            }
        }
    }
    for o in c.outputs() {
        b.add_output(c.net_name(*o));
    }
    b.build()
}

fn fixpoint(c: &Circuit, consts: &HashMap<NetId, bool>) -> Result<Circuit, NetlistError> {
    let mut cur = sweep_once(c, consts)?;
    for _ in 0..8 {
        let next = sweep_once(&cur, &HashMap::new())?;
        if next.same_structure(&cur) {
            return Ok(next);
        }
        cur = next;
    }
    Ok(cur)
}

/// Constant propagation, buffer and double-inverter removal, inverter
/// absorption, complementary-input folding, structural hashing and dead-logic
/// removal, iterated to a fixpoint. Port names and order are preserved.
pub fn sweep(c: &Circuit) -> Circuit {
    fixpoint(c, &HashMap::new()).expect("sweep preserves well-formedness")
}

/// Ties the given ports to constants and sweeps; those ports disappear.
pub fn tie_ports(c: &Circuit, consts: &HashMap<NetId, bool>) -> Circuit {
    fixpoint(c, consts).expect("sweep preserves well-formedness")
}

fn tree(b: &mut CircuitBuilder, kind: GateKind, ins: &[String], out: Option<&str>) -> String {
    // Balanced 2-input tree of the non-inverting base; the root carries `kind`.
    let base = match kind {
        GateKind::Nand => GateKind::And,
        GateKind::Nor => GateKind::Or,
        GateKind::Xnor => GateKind::Xor,
        k => k,
    };
    let mut layer: Vec<String> = ins.to_vec();
    while layer.len() > 2 {
        let mut next = Vec::with_capacity(layer.len().div_ceil(2));
        for ch in layer.chunks(2) {
            if ch.len() == 2 {
                next.push(b.gate(base, "_m", ch));
            } else {
                next.push(ch[0].clone());
            }
        }
        layer = next;
    }
    match out {
        Some(o) => b.add_gate(kind, o, &layer),
        None => b.gate(kind, "_m", &layer),
    }
}

/// Rewrites every gate into 2-input standard gates plus inverters.
pub fn remap_standard(c: &Circuit) -> Circuit {
    let mut b = CircuitBuilder::new(c.name());
    for p in c.ports() {
        b.add_input(c.net_name(p));
    }
    for n in c.net_ids() {
        b.reserve(c.net_name(n));
    }
    for g in c.topo_order() {
        let g = c.gate(*g);
        let out = c.net_name(g.output).to_string();
        let ins: Vec<String> = g.inputs.iter().map(|i| c.net_name(*i).to_string()).collect();
        match g.kind {
            GateKind::Buf => {
                b.add_gate(GateKind::Buf, &out, &ins);
            }
            GateKind::Inv | GateKind::Const0 | GateKind::Const1 => {
                b.add_gate(g.kind, &out, &ins);
            }
            k => {
                tree(&mut b, k, &ins, Some(&out));
            }
        }
    }
    for o in c.outputs() {
        b.add_output(c.net_name(*o));
    }
    let r = b.build().expect("remap preserves well-formedness");
    // Buffers survive only where an output aliases another net.
    let swept = sweep(&r);
    split_wide(&swept)
}

/// Sweeping can merge 2-input gates back into wider ones; split them again.
fn split_wide(c: &Circuit) -> Circuit {
    if c.gates().iter().all(|g| g.inputs.len() <= 2) {
        return c.clone();
    }
    let mut b = CircuitBuilder::from_circuit(c);
    let wide: Vec<(String, GateKind, Vec<String>)> = c
        .gates()
        .iter()
        .filter(|g| g.inputs.len() > 2)
        .map(|g| {
            (
                c.net_name(g.output).to_string(),
                g.kind,
                g.inputs.iter().map(|i| c.net_name(*i).to_string()).collect(),
            )
        })
        .collect();
    for (out, kind, ins) in wide {
        b.remove_gate_driving(&out);
        tree(&mut b, kind, &ins, Some(&out));
    }
    b.build().expect("split preserves well-formedness")
}

/// Truth table over `n` variables; bit `m` is the value on minterm `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Tt {
    n: usize,
    w: Vec<u64>,
}

impl Tt {
    fn zeros(n: usize) -> Tt {
        Tt {
            n,
            w: vec![0; if n <= 6 { 1 } else { 1 << (n - 6) }],
        }
    }

    fn mask(n: usize) -> u64 {
        if n >= 6 {
            !0
        } else {
            (1u64 << (1 << n)) - 1
        }
    }

    fn ones(n: usize) -> Tt {
        let mut t = Tt::zeros(n);
        for w in &mut t.w {
            *w = Tt::mask(n);
        }
        t
    }

    fn is_zero(&self) -> bool {
        self.w.iter().all(|w| *w == 0)
    }

    fn is_ones(&self) -> bool {
        let m = Tt::mask(self.n);
        self.w.iter().all(|w| *w == m)
    }

    fn zip(&self, o: &Tt, f: impl Fn(u64, u64) -> u64) -> Tt {
        let m = Tt::mask(self.n);
        Tt {
            n: self.n,
            w: self.w.iter().zip(&o.w).map(|(a, b)| f(*a, *b) & m).collect(),
        }
    }

    /// Cofactors with respect to the top variable.
    fn split(&self) -> (Tt, Tt) {
        let n = self.n - 1;
        if self.n > 6 {
            let h = self.w.len() / 2;
            (
                Tt { n, w: self.w[..h].to_vec() },
                Tt { n, w: self.w[h..].to_vec() },
            )
        } else {
            let half = 1 << n;
            let m = Tt::mask(n);
            (
                Tt { n, w: vec![self.w[0] & m] },
                Tt { n, w: vec![(self.w[0] >> half) & m] },
            )
        }
    }

    fn join(lo: &Tt, hi: &Tt) -> Tt {
        let n = lo.n + 1;
        if n > 6 {
            let mut w = lo.w.clone();
            w.extend_from_slice(&hi.w);
            Tt { n, w }
        } else {
            let half = 1 << lo.n;
            Tt {
                n,
                w: vec![lo.w[0] | (hi.w[0] << half)],
            }
        }
    }
}

/// A product term: per variable, `Some(v)` for a literal, `None` if absent.
type Cube = Vec<Option<bool>>;

fn isop(l: &Tt, u: &Tt, budget: &mut usize) -> Option<(Vec<Cube>, Tt)> {
    let n = l.n;
    if l.is_zero() {
        return Some((Vec::new(), Tt::zeros(n)));
    }
    if u.is_ones() {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        return Some((vec![vec![None; n]], Tt::ones(n)));
    }
    let (l0, l1) = l.split();
    let (u0, u1) = u.split();
    let (c0, f0) = isop(&l0.zip(&u1, |a, b| a & !b), &u0, budget)?;
    let (c1, f1) = isop(&l1.zip(&u0, |a, b| a & !b), &u1, budget)?;
    let ls = l0
        .zip(&f0, |a, b| a & !b)
        .zip(&l1.zip(&f1, |a, b| a & !b), |a, b| a | b);
    let us = u0.zip(&u1, |a, b| a & b);
    let (cs, fs) = isop(&ls, &us, budget)?;
    let mut cubes = Vec::with_capacity(c0.len() + c1.len() + cs.len());
    for mut c in c0 {
        c.push(Some(false));
        cubes.push(c);
    }
    for mut c in c1 {
        c.push(Some(true));
        cubes.push(c);
    }
    for mut c in cs {
        c.push(None);
        cubes.push(c);
    }
    let f = Tt::join(&f0.zip(&fs, |a, b| a | b), &f1.zip(&fs, |a, b| a | b));
    Some((cubes, f))
}

fn cone_truth_table(cone: &Circuit) -> Tt {
    let n = cone.num_ports();
    let rows = 1usize << n;
    let mut t = Tt::zeros(n);
    let out = cone.outputs()[0];
    let mut base = 0;
    while base < rows {
        let words: Vec<u64> = (0..n)
            .map(|i| {
                if i < 6 {
                    // Pattern within a word.
                    let mut w = 0u64;
                    for j in 0..64 {
                        if (j >> i) & 1 == 1 {
                            w |= 1 << j;
                        }
                    }
                    w
                } else if (base >> i) & 1 == 1 {
                    !0
                } else {
                    0
                }
            })
            .collect();
        let v = eval_words(cone, &words).expect("width");
        t.w[base / 64] = v[out.index()] & Tt::mask(n);
        base += 64;
    }
    t
}

/// Collapses the logic cone of output `po` to a two-level cover and
/// re-decomposes it into 2-input gates. Cones with more than
/// [`FLATTEN_MAX_INPUTS`] inputs, or whose cover exceeds
/// [`FLATTEN_MAX_CUBES`] cubes, are only swept and remapped.
pub fn flatten_cone(c: &Circuit, po: NetId) -> Circuit {
    let flat = collapse_cones(c, &[po]);
    remap_standard(&sweep(flat.as_ref().unwrap_or(c)))
}

/// Replaces the driver of each output in `pos` by its two-level cover,
/// leaving the old cones dangling. Outputs whose cone is too wide or whose
/// cover is too large keep their logic. `None` when nothing changed.
fn collapse_cones(c: &Circuit, pos: &[NetId]) -> Option<Circuit> {
    let mut b = CircuitBuilder::from_circuit(c);
    let mut changed = false;
    for &po in pos {
        let Ok(cone) = c.extract_cone(po) else { continue };
        if cone.num_ports() > FLATTEN_MAX_INPUTS || cone.num_gates() == 0 {
            continue;
        }
        let tt = cone_truth_table(&cone);
        let mut budget = FLATTEN_MAX_CUBES;
        let Some((cubes, _)) = isop(&tt, &tt, &mut budget) else { continue };
        let po_name = c.net_name(po).to_string();
        if b.detach_driver(&po_name, "_old").is_none() {
            continue;
        }
        changed = true;
        let vars: Vec<String> = cone.ports().map(|p| cone.net_name(p).to_string()).collect();
        let mut inv_cache: HashMap<usize, String> = HashMap::new();
        let mut terms = Vec::new();
        for cube in &cubes {
            let mut lits = Vec::new();
            for (i, v) in cube.iter().enumerate() {
                match v {
                    Some(true) => lits.push(vars[i].clone()),
                    Some(false) => {
                        let n = inv_cache
                            .entry(i)
                            .or_insert_with(|| b.gate(GateKind::Inv, "_f", &[vars[i].as_str()]))
                            .clone();
                        lits.push(n);
                    }
                    None => {}
                }
            }
            terms.push(match lits.len() {
                0 => b.gate::<&str>(GateKind::Const1, "_f", &[]),
                1 => lits.pop().unwrap(),
                _ => tree(&mut b, GateKind::And, &lits, None),
            });
        }
        match terms.len() {
            0 => {
                b.add_gate::<&str>(GateKind::Const0, &po_name, &[]);
            }
            1 => {
                b.add_gate(GateKind::Buf, &po_name, &terms);
            }
            _ => {
                tree(&mut b, GateKind::Or, &terms, Some(&po_name));
            }
        }
    }
    changed.then(|| b.build().expect("flatten preserves well-formedness"))
}

/// Named pass sequences standing in for synthesis recipes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recipe {
    /// Sweep only.
    Light,
    /// Remap to 2-input gates, then sweep.
    Medium,
    /// Remap, sweep, flatten every output cone, sweep.
    Heavy,
}

impl Recipe {
    pub const ALL: [Recipe; 3] = [Recipe::Light, Recipe::Medium, Recipe::Heavy];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::Light => "light",
            Recipe::Medium => "medium",
            Recipe::Heavy => "heavy",
        }
    }

    pub fn parse(s: &str) -> Option<Recipe> {
        Recipe::ALL.into_iter().find(|r| r.name() == s)
    }

    pub fn apply(self, c: &Circuit) -> Circuit {
        match self {
            Recipe::Light => sweep(c),
            Recipe::Medium => remap_standard(c),
            Recipe::Heavy => {
                let cur = remap_standard(c);
                match collapse_cones(&cur, cur.outputs()) {
                    Some(flat) => sweep(&remap_standard(&sweep(&flat))),
                    None => sweep(&cur),
                }
            }
        }
    }
}

/// Runs an external synthesizer through BENCH files. The command template
/// must contain `{in}` and `{out}` placeholders and is run by `sh -c`.
pub fn external_synth_roundtrip(c: &Circuit, template: &str) -> Result<Circuit, ResynthError> {
    let dir = std::env::temp_dir().join(format!(
        "psll-synth-{}-{}",
        std::process::id(),
        c.num_gates()
    ));
    std::fs::create_dir_all(&dir)?;
    let inp = dir.join("in.bench");
    let out = dir.join("out.bench");
    std::fs::write(&inp, emit_bench(c))?;
    let cmd = template
        .replace("{in}", &inp.display().to_string())
        .replace("{out}", &out.display().to_string());
    let program = cmd.split_whitespace().next().unwrap_or("").to_string();
    let status = Command::new("sh").arg("-c").arg(&cmd).output();
    let result = (|| {
        let status = status.map_err(|e| ResynthError::ToolMissing(e.to_string()))?;
        if status.status.code() == Some(127) {
            return Err(ResynthError::ToolMissing(program));
        }
        if !status.status.success() {
            return Err(ResynthError::ToolFailed(
                String::from_utf8_lossy(&status.stderr).trim().to_string(),
            ));
        }
        let text = std::fs::read_to_string(&out)
            .map_err(|e| ResynthError::ToolFailed(format!("no output file: {e}")))?;
        let r = parse_bench(&text)?.with_name(c.name());
        match check_equivalence(c, &r)? {
            Equivalence::Equivalent => Ok(r),
            Equivalence::Counterexample(_) => Err(ResynthError::NotEquivalent),
        }
    })();
    let _ = std::fs::remove_dir_all(&dir);
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::check_equivalence;

    fn eq(a: &Circuit, b: &Circuit) -> bool {
        check_equivalence(a, b).unwrap().is_equivalent()
    }

    #[test]
    fn and4_becomes_tree() {
        let c = parse_bench("INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(d)\nOUTPUT(y)\ny = AND(a, b, c, d)").unwrap();
        let r = remap_standard(&c);
        assert_eq!(r.num_gates(), 3);
        assert!(r.gates().iter().all(|g| g.inputs.len() == 2));
        assert!(eq(&c, &r));
    }

    #[test]
    fn sweep_folds_constants_and_inverters() {
        let c = parse_bench(
            "INPUT(a)\nINPUT(b)\nOUTPUT(y)\nOUTPUT(z)\nz0 = CONST0()\n\
             na = NOT(a)\nnna = NOT(na)\nt = AND(nna, b)\nu = OR(t, z0)\ny = BUFF(u)\n\
             w = AND(a, na)\nz = OR(w, b)\n",
        )
        .unwrap();
        let s = sweep(&c);
        assert!(eq(&c, &s));
        assert_eq!(s.num_gates(), 2, "{}", emit_bench(&s));
        assert!(sweep(&s).same_structure(&s));
    }

    #[test]
    fn inv_of_xor_absorbed() {
        let c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\nt = XOR(a, b)\ny = NOT(t)").unwrap();
        let s = sweep(&c);
        assert_eq!(s.num_gates(), 1);
        assert_eq!(s.gates()[0].kind, GateKind::Xnor);
    }

    #[test]
    fn tie_ports_removes_them() {
        let c = parse_bench("INPUT(a)\nINPUT(keyinput0)\nOUTPUT(y)\ny = XOR(a, keyinput0)").unwrap();
        let mut m = HashMap::new();
        m.insert(c.net("keyinput0").unwrap(), true);
        let t = tie_ports(&c, &m);
        assert!(t.key_inputs().is_empty());
        assert_eq!(t.gates()[0].kind, GateKind::Inv);
    }

    #[test]
    fn flatten_preserves_function() {
        let c = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(d)\nOUTPUT(y)\nOUTPUT(z)\n\
             t = XOR(a, b)\nu = NAND(t, c)\ny = NOR(u, d)\nz = AND(t, d)\n",
        )
        .unwrap();
        let f = flatten_cone(&c, c.net("y").unwrap());
        assert!(eq(&c, &f));
        for r in Recipe::ALL {
            assert!(eq(&c, &r.apply(&c)));
        }
    }

    #[test]
    fn isop_exact_on_random_tables() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 1..9 {
            let mut t = Tt::zeros(n);
            for w in &mut t.w {
                *w = rng.gen::<u64>() & Tt::mask(n);
            }
            let mut budget = usize::MAX;
            let (cubes, f) = isop(&t, &t, &mut budget).unwrap();
            assert_eq!(f, t);
            for m in 0..(1usize << n) {
                let covered = cubes.iter().any(|c| {
                    c.iter()
                        .enumerate()
                        .all(|(i, v)| v.map_or(true, |v| ((m >> i) & 1 == 1) == v))
                });
                assert_eq!(covered, (t.w[m / 64] >> (m % 64)) & 1 == 1);
            }
        }
    }

    #[test]
    fn missing_tool_reported() {
        let c = parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)").unwrap();
        let e = external_synth_roundtrip(&c, "definitely-not-a-tool-xyz {in} {out}").unwrap_err();
        assert!(matches!(e, ResynthError::ToolMissing(_)));
        let ok = external_synth_roundtrip(&c, "cp {in} {out}").unwrap();
        assert!(ok.same_structure(&c));
    }
}
