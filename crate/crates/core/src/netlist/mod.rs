//! Combinational gate-level netlists.
//!
//! A [`Circuit`] is an immutable DAG of gates over named nets. Primary inputs
//! are split into ordinary inputs and key inputs: any input whose name is
//! `keyinput<N>` (case-insensitive) is a key input and `N` fixes its position
//! in the key.

mod bench;
mod query;
mod verilog;

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

pub use bench::{emit_bench, parse_bench, parse_bench_named};
pub use query::{get_index, Bitset, SupportMap};
pub use verilog::{emit_verilog, parse_structural_verilog};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("combinational loop through net `{0}`")]
    Cycle(String),
    #[error("net `{0}` is used but never driven")]
    Undriven(String),
    #[error("net `{0}` has more than one driver")]
    MultipleDrivers(String),
    #[error("gate driving `{net}`: {kind} cannot take {got} inputs")]
    Arity { net: String, kind: GateKind, got: usize },
    #[error("unknown net `{0}`")]
    UnknownNet(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("duplicate key input index {0}")]
    DuplicateKeyIndex(usize),
    #[error("net `{0}` drives no gate")]
    EmptyFanout(String),
    #[error("output `{0}` is listed twice")]
    DuplicateOutput(String),
}

pub type Result<T> = std::result::Result<T, NetlistError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetId(pub u32);

impl NetId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GateId(pub u32);

impl GateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Xnor,
    Inv,
    Buf,
    Const0,
    Const1,
}

impl GateKind {
    pub const STANDARD: [GateKind; 7] = [
        GateKind::And,
        GateKind::Nand,
        GateKind::Or,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
        GateKind::Inv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Nand => "NAND",
            GateKind::Or => "OR",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Inv => "NOT",
            GateKind::Buf => "BUFF",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
        }
    }

    pub fn from_name(s: &str) -> Option<GateKind> {
        Some(match s.to_ascii_uppercase().as_str() {
            "AND" => GateKind::And,
            "NAND" => GateKind::Nand,
            "OR" => GateKind::Or,
            "NOR" => GateKind::Nor,
            "XOR" => GateKind::Xor,
            "XNOR" => GateKind::Xnor,
            "NOT" | "INV" => GateKind::Inv,
            "BUF" | "BUFF" => GateKind::Buf,
            "CONST0" | "GND" => GateKind::Const0,
            "CONST1" | "VDD" => GateKind::Const1,
            _ => return None,
        })
    }

    pub fn arity_ok(self, n: usize) -> bool {
        match self {
            GateKind::Inv | GateKind::Buf => n == 1,
            GateKind::Xor | GateKind::Xnor => n == 2,
            GateKind::And | GateKind::Nand | GateKind::Or | GateKind::Nor => n >= 2,
            GateKind::Const0 | GateKind::Const1 => n == 0,
        }
    }

    /// True when the gate complements its underlying AND/OR/XOR/BUF function.
    pub fn is_inverting(self) -> bool {
        matches!(
            self,
            GateKind::Nand | GateKind::Nor | GateKind::Xnor | GateKind::Inv
        )
    }

    /// The same gate with its output inverted.
    pub fn complement(self) -> GateKind {
        match self {
            GateKind::And => GateKind::Nand,
            GateKind::Nand => GateKind::And,
            GateKind::Or => GateKind::Nor,
            GateKind::Nor => GateKind::Or,
            GateKind::Xor => GateKind::Xnor,
            GateKind::Xnor => GateKind::Xor,
            GateKind::Buf => GateKind::Inv,
            GateKind::Inv => GateKind::Buf,
            GateKind::Const0 => GateKind::Const1,
            GateKind::Const1 => GateKind::Const0,
        }
    }

    /// Input value that forces the output regardless of the other inputs.
    pub fn controlling_value(self) -> Option<bool> {
        match self {
            GateKind::And | GateKind::Nand => Some(false),
            GateKind::Or | GateKind::Nor => Some(true),
            _ => None,
        }
    }

    pub fn is_xor_like(self) -> bool {
        matches!(self, GateKind::Xor | GateKind::Xnor)
    }

    pub fn eval<I: IntoIterator<Item = bool>>(self, inputs: I) -> bool {
        let mut it = inputs.into_iter();
        match self {
            GateKind::And => it.all(|b| b),
            GateKind::Nand => !it.all(|b| b),
            GateKind::Or => it.any(|b| b),
            GateKind::Nor => !it.any(|b| b),
            GateKind::Xor => it.fold(false, |a, b| a ^ b),
            GateKind::Xnor => !it.fold(false, |a, b| a ^ b),
            GateKind::Inv => !it.next().unwrap_or(false),
            GateKind::Buf => it.next().unwrap_or(false),
            GateKind::Const0 => false,
            GateKind::Const1 => true,
        }
    }

    /// Bit-parallel evaluation over 64 patterns at once.
    pub fn eval_words<I: IntoIterator<Item = u64>>(self, inputs: I) -> u64 {
        let mut it = inputs.into_iter();
        match self {
            GateKind::And => it.fold(!0, |a, b| a & b),
            GateKind::Nand => !it.fold(!0, |a, b| a & b),
            GateKind::Or => it.fold(0, |a, b| a | b),
            GateKind::Nor => !it.fold(0, |a, b| a | b),
            GateKind::Xor => it.fold(0, |a, b| a ^ b),
            GateKind::Xnor => !it.fold(0, |a, b| a ^ b),
            GateKind::Inv => !it.next().unwrap_or(0),
            GateKind::Buf => it.next().unwrap_or(0),
            GateKind::Const0 => 0,
            GateKind::Const1 => !0,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub name: String,
    pub kind: GateKind,
    pub inputs: Vec<NetId>,
    pub output: NetId,
}

/// Parses `keyinput<N>` (case-insensitive) into `N`.
pub fn key_index(name: &str) -> Option<usize> {
    let prefix = "keyinput";
    if name.len() <= prefix.len() || !name[..prefix.len()].eq_ignore_ascii_case(prefix) {
        return None;
    }
    let digits = &name[prefix.len()..];
    if digits.bytes().all(|b| b.is_ascii_digit()) {
        digits.parse().ok()
    } else {
        None
    }
}

/// Ports touched by a locking construction, by name.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PortRoles {
    /// Protected input ports (primary inputs or key inputs).
    pub pip: Vec<String>,
    /// Protected output ports.
    pub pop: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NetRole {
    Input(usize),
    Key(usize),
    Internal,
}

#[derive(Clone, Debug)]
pub struct Circuit {
    name: String,
    net_names: Vec<String>,
    net_index: HashMap<String, NetId>,
    inputs: Vec<NetId>,
    key_inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    gates: Vec<Gate>,
    driver: Vec<Option<GateId>>,
    fanout: Vec<Vec<GateId>>,
    roles: Vec<NetRole>,
    topo: Vec<GateId>,
    level: Vec<u32>,
}

impl Circuit {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[NetId] {
        &self.inputs
    }

    pub fn key_inputs(&self) -> &[NetId] {
        &self.key_inputs
    }

    pub fn outputs(&self) -> &[NetId] {
        &self.outputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, g: GateId) -> &Gate {
        &self.gates[g.index()]
    }

    pub fn num_nets(&self) -> usize {
        self.net_names.len()
    }

    pub fn num_gates(&self) -> usize {
        self.gates.len()
    }

    /// Inputs followed by key inputs; the port order used by every pattern.
    pub fn ports(&self) -> impl Iterator<Item = NetId> + '_ {
        self.inputs.iter().chain(self.key_inputs.iter()).copied()
    }

    pub fn num_ports(&self) -> usize {
        self.inputs.len() + self.key_inputs.len()
    }

    pub fn net_name(&self, n: NetId) -> &str {
        &self.net_names[n.index()]
    }

    pub fn net(&self, name: &str) -> Option<NetId> {
        self.net_index.get(name).copied()
    }

    pub fn net_or_err(&self, name: &str) -> Result<NetId> {
        self.net(name)
            .ok_or_else(|| NetlistError::UnknownNet(name.to_string()))
    }

    pub fn driver(&self, n: NetId) -> Option<GateId> {
        self.driver[n.index()]
    }

    pub fn fanout(&self, n: NetId) -> &[GateId] {
        &self.fanout[n.index()]
    }

    pub fn role(&self, n: NetId) -> NetRole {
        self.roles[n.index()]
    }

    pub fn is_key_input(&self, n: NetId) -> bool {
        matches!(self.roles[n.index()], NetRole::Key(_))
    }

    pub fn is_input(&self, n: NetId) -> bool {
        matches!(self.roles[n.index()], NetRole::Input(_))
    }

    /// Position of a PI or KI in [`Circuit::ports`].
    pub fn port_index(&self, n: NetId) -> Option<usize> {
        match self.roles[n.index()] {
            NetRole::Input(i) => Some(i),
            NetRole::Key(i) => Some(self.inputs.len() + i),
            NetRole::Internal => None,
        }
    }

    pub fn is_output(&self, n: NetId) -> bool {
        self.outputs.contains(&n)
    }

    /// Gates in topological order.
    pub fn topo_order(&self) -> &[GateId] {
        &self.topo
    }

    /// Logic depth of a net: 0 for inputs, 1 + max fanin depth otherwise.
    pub fn level(&self, n: NetId) -> u32 {
        self.level[n.index()]
    }

    pub fn net_ids(&self) -> impl Iterator<Item = NetId> {
        (0..self.net_names.len() as u32).map(NetId)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Circuit {
        self.name = name.into();
        self
    }

    /// Structural identity up to gate names: same named ports in the same order
    /// and the same (output, kind, inputs) triples.
    pub fn same_structure(&self, other: &Circuit) -> bool {
        let names = |c: &Circuit, v: &[NetId]| -> Vec<String> {
            v.iter().map(|n| c.net_name(*n).to_string()).collect()
        };
        if names(self, &self.inputs) != names(other, &other.inputs)
            || names(self, &self.key_inputs) != names(other, &other.key_inputs)
            || names(self, &self.outputs) != names(other, &other.outputs)
            || self.gates.len() != other.gates.len()
        {
            return false;
        }
        let sig = |c: &Circuit| {
            let mut v: Vec<(String, GateKind, Vec<String>)> = c
                .gates
                .iter()
                .map(|g| {
                    (
                        c.net_name(g.output).to_string(),
                        g.kind,
                        g.inputs.iter().map(|i| c.net_name(*i).to_string()).collect(),
                    )
                })
                .collect();
            v.sort();
            v
        };
        sig(self) == sig(other)
    }
}

#[derive(Clone, Debug)]
struct PendingGate {
    name: Option<String>,
    kind: GateKind,
    output: String,
    inputs: Vec<String>,
}

/// Mutable, name-based netlist under construction.
///
/// Forward references are allowed; everything is resolved and validated in
/// [`CircuitBuilder::build`].
#[derive(Clone, Debug, Default)]
pub struct CircuitBuilder {
    name: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    gates: Vec<PendingGate>,
    used: HashSet<String>,
    fresh: usize,
}

impl CircuitBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        CircuitBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn from_circuit(c: &Circuit) -> Self {
        let mut b = CircuitBuilder::new(c.name());
        for n in c.ports() {
            b.add_input(c.net_name(n));
        }
        for g in c.topo_order() {
            let g = c.gate(*g);
            b.gates.push(PendingGate {
                name: Some(g.name.clone()),
                kind: g.kind,
                output: c.net_name(g.output).to_string(),
                inputs: g.inputs.iter().map(|i| c.net_name(*i).to_string()).collect(),
            });
            b.used.insert(c.net_name(g.output).to_string());
        }
        for o in c.outputs() {
            b.outputs.push(c.net_name(*o).to_string());
        }
        b
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn add_input(&mut self, name: &str) {
        self.used.insert(name.to_string());
        self.inputs.push(name.to_string());
    }

    pub fn add_output(&mut self, name: &str) {
        self.used.insert(name.to_string());
        self.outputs.push(name.to_string());
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    /// Marks a name as taken so [`CircuitBuilder::fresh`] never returns it.
    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    pub fn contains(&self, name: &str) -> bool {
        self.used.contains(name)
    }

    /// Adds `output = kind(inputs)` and returns the output name.
    pub fn add_gate<S: AsRef<str>>(&mut self, kind: GateKind, output: &str, inputs: &[S]) -> String {
        self.used.insert(output.to_string());
        for i in inputs {
            self.used.insert(i.as_ref().to_string());
        }
        self.gates.push(PendingGate {
            name: None,
            kind,
            output: output.to_string(),
            inputs: inputs.iter().map(|s| s.as_ref().to_string()).collect(),
        });
        output.to_string()
    }

    pub fn add_named_gate<S: AsRef<str>>(
        &mut self,
        gate_name: &str,
        kind: GateKind,
        output: &str,
        inputs: &[S],
    ) -> String {
        self.add_gate(kind, output, inputs);
        self.gates.last_mut().unwrap().name = Some(gate_name.to_string());
        output.to_string()
    }

    /// A net name not used so far, derived from `prefix`.
    pub fn fresh(&mut self, prefix: &str) -> String {
        loop {
            let cand = format!("{prefix}{}", self.fresh);
            self.fresh += 1;
            if !self.used.contains(&cand) {
                self.used.insert(cand.clone());
                return cand;
            }
        }
    }

    /// Adds a gate with a fresh output name.
    pub fn gate<S: AsRef<str>>(&mut self, kind: GateKind, prefix: &str, inputs: &[S]) -> String {
        let out = self.fresh(prefix);
        self.add_gate(kind, &out, inputs)
    }

    /// Renames a gate-driven net everywhere it appears (driver, fanins, outputs).
    pub fn rename_net(&mut self, old: &str, new: &str) {
        for g in &mut self.gates {
            if g.output == old {
                g.output = new.to_string();
            }
            for i in &mut g.inputs {
                if i == old {
                    *i = new.to_string();
                }
            }
        }
        for o in &mut self.outputs {
            if o == old {
                *o = new.to_string();
            }
        }
        self.used.insert(new.to_string());
    }

    /// Moves the driver of `net` to a fresh internal name, leaving `net`
    /// undriven so a new gate can take its place. Fanin references keep
    /// pointing at the old logic. Returns the new internal name.
    pub fn detach_driver(&mut self, net: &str, prefix: &str) -> Option<String> {
        let idx = self.gates.iter().position(|g| g.output == net)?;
        let fresh = self.fresh(prefix);
        self.gates[idx].output = fresh.clone();
        for g in &mut self.gates {
            for i in &mut g.inputs {
                if i == net {
                    *i = fresh.clone();
                }
            }
        }
        Some(fresh)
    }

    pub fn is_gate_driven(&self, net: &str) -> bool {
        self.gates.iter().any(|g| g.output == net)
    }

    pub fn remove_gate_driving(&mut self, net: &str) {
        self.gates.retain(|g| g.output != net);
    }

    pub fn build(self) -> Result<Circuit> {
        let mut net_names: Vec<String> = Vec::new();
        let mut net_index: HashMap<String, NetId> = HashMap::new();
        let mut intern = |s: &str, names: &mut Vec<String>| -> NetId {
            if let Some(id) = net_index.get(s) {
                return *id;
            }
            let id = NetId(names.len() as u32);
            names.push(s.to_string());
            net_index.insert(s.to_string(), id);
            id
        };

        let mut plain = Vec::new();
        let mut keyed: Vec<(usize, NetId)> = Vec::new();
        let mut seen_inputs = HashSet::new();
        for name in &self.inputs {
            if !seen_inputs.insert(name.clone()) {
                return Err(NetlistError::MultipleDrivers(name.clone()));
            }
            let id = intern(name, &mut net_names);
            match key_index(name) {
                Some(k) => keyed.push((k, id)),
                None => plain.push(id),
            }
        }
        keyed.sort();
        for w in keyed.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(NetlistError::DuplicateKeyIndex(w[0].0));
            }
        }
        let key_inputs: Vec<NetId> = keyed.iter().map(|(_, id)| *id).collect();

        let mut gates = Vec::with_capacity(self.gates.len());
        for (seq, pg) in self.gates.iter().enumerate() {
            if !pg.kind.arity_ok(pg.inputs.len()) {
                return Err(NetlistError::Arity {
                    net: pg.output.clone(),
                    kind: pg.kind,
                    got: pg.inputs.len(),
                });
            }
            let output = intern(&pg.output, &mut net_names);
            let inputs = pg.inputs.iter().map(|s| intern(s, &mut net_names)).collect();
            gates.push(Gate {
                name: pg.name.clone().unwrap_or_else(|| format!("g{seq}")),
                kind: pg.kind,
                inputs,
                output,
            });
        }
        let mut outputs = Vec::with_capacity(self.outputs.len());
        let mut seen_out = HashSet::new();
        for o in &self.outputs {
            if !seen_out.insert(o.clone()) {
                return Err(NetlistError::DuplicateOutput(o.clone()));
            }
            outputs.push(intern(o, &mut net_names));
        }

        let n = net_names.len();
        let mut roles = vec![NetRole::Internal; n];
        for (i, id) in plain.iter().enumerate() {
            roles[id.index()] = NetRole::Input(i);
        }
        for (i, id) in key_inputs.iter().enumerate() {
            roles[id.index()] = NetRole::Key(i);
        }
        let mut driver: Vec<Option<GateId>> = vec![None; n];
        let mut fanout: Vec<Vec<GateId>> = vec![Vec::new(); n];
        for (gi, g) in gates.iter().enumerate() {
            let o = g.output.index();
            if driver[o].is_some() || roles[o] != NetRole::Internal {
                return Err(NetlistError::MultipleDrivers(net_names[o].clone()));
            }
            driver[o] = Some(GateId(gi as u32));
            for i in &g.inputs {
                let fo = &mut fanout[i.index()];
                if !fo.contains(&GateId(gi as u32)) {
                    fo.push(GateId(gi as u32));
                }
            }
        }
        for id in 0..n {
            if roles[id] == NetRole::Internal && driver[id].is_none() {
                return Err(NetlistError::Undriven(net_names[id].clone()));
            }
        }

        // Kahn's algorithm; ties resolved by gate index for determinism.
        let mut pending: Vec<usize> = gates
            .iter()
            .map(|g| {
                let mut u: Vec<NetId> = g.inputs.clone();
                u.sort();
                u.dedup();
                u.iter().filter(|i| driver[i.index()].is_some()).count()
            })
            .collect();
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = pending
            .iter()
            .enumerate()
            .filter(|(_, p)| **p == 0)
            .map(|(i, _)| std::cmp::Reverse(i))
            .collect();
        let mut topo = Vec::with_capacity(gates.len());
        let mut level = vec![0u32; n];
        while let Some(std::cmp::Reverse(gi)) = ready.pop() {
            let g = &gates[gi];
            level[g.output.index()] =
                1 + g.inputs.iter().map(|i| level[i.index()]).max().unwrap_or(0);
            topo.push(GateId(gi as u32));
            for succ in &fanout[g.output.index()] {
                pending[succ.index()] -= 1;
                if pending[succ.index()] == 0 {
                    ready.push(std::cmp::Reverse(succ.index()));
                }
            }
        }
        if topo.len() != gates.len() {
            let stuck = pending.iter().position(|p| *p > 0).unwrap();
            return Err(NetlistError::Cycle(
                net_names[gates[stuck].output.index()].clone(),
            ));
        }

        Ok(Circuit {
            name: self.name,
            net_names,
            net_index,
            inputs: plain,
            key_inputs,
            outputs,
            gates,
            driver,
            fanout,
            roles,
            topo,
            level,
        })
    }
}
