//! Tseitin encoding of circuits with on-the-fly constant folding and
//! structural hashing.

use std::collections::HashMap;

use super::solver::{Lit, SatResult, Solver, Var};
use crate::netlist::{Circuit, GateKind, NetId};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    And(Vec<Lit>),
    Xor(Lit, Lit),
}

/// Incremental circuit-to-CNF encoder feeding an owned [`Solver`].
///
/// Every internal node is an AND or a 2-input XOR over literals; inverters
/// are free. Structurally identical nodes share a variable.
#[derive(Debug)]
pub struct Encoder {
    pub solver: Solver,
    truth: Lit,
    strash: HashMap<Node, Lit>,
    clauses: Option<Vec<Vec<Lit>>>,
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Encoder {
    pub fn new() -> Self {
        let mut solver = Solver::new();
        let t = solver.new_var();
        solver.add_clause(&[t.pos()]);
        Encoder {
            solver,
            truth: t.pos(),
            strash: HashMap::new(),
            clauses: None,
        }
    }

    /// Like [`Encoder::new`] but also records every clause for DIMACS output.
    pub fn recording() -> Self {
        let mut e = Self::new();
        e.clauses = Some(vec![vec![e.truth]]);
        e
    }

    pub fn recorded_clauses(&self) -> Option<&[Vec<Lit>]> {
        self.clauses.as_deref()
    }

    pub fn true_lit(&self) -> Lit {
        self.truth
    }

    pub fn false_lit(&self) -> Lit {
        !self.truth
    }

    pub fn constant(&self, v: bool) -> Lit {
        if v {
            self.truth
        } else {
            !self.truth
        }
    }

    /// `Some(v)` if the literal is one of the two constants.
    pub fn as_const(&self, l: Lit) -> Option<bool> {
        if l == self.truth {
            Some(true)
        } else if l == !self.truth {
            Some(false)
        } else {
            None
        }
    }

    pub fn new_var(&mut self) -> Var {
        self.solver.new_var()
    }

    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if let Some(c) = &mut self.clauses {
            c.push(lits.to_vec());
        }
        self.solver.add_clause(lits)
    }

    pub fn and(&mut self, ins: &[Lit]) -> Lit {
        let mut v: Vec<Lit> = Vec::with_capacity(ins.len());
        for &l in ins {
            match self.as_const(l) {
                Some(false) => return self.false_lit(),
                Some(true) => {}
                None => v.push(l),
            }
        }
        v.sort();
        v.dedup();
        for w in v.windows(2) {
            if w[0] == !w[1] {
                return self.false_lit();
            }
        }
        match v.len() {
            0 => return self.true_lit(),
            1 => return v[0],
            _ => {}
        }
        let key = Node::And(v);
        if let Some(l) = self.strash.get(&key) {
            return *l;
        }
        let Node::And(v) = &key else { unreachable!() };
        let y = self.solver.new_var().pos();
        let mut big = Vec::with_capacity(v.len() + 1);
        big.push(y);
        for &a in v {
            self.add_clause(&[!y, a]);
            big.push(!a);
        }
        self.add_clause(&big);
        self.strash.insert(key, y);
        y
    }

    pub fn or(&mut self, ins: &[Lit]) -> Lit {
        let neg: Vec<Lit> = ins.iter().map(|l| !*l).collect();
        !self.and(&neg)
    }

    pub fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        match (self.as_const(a), self.as_const(b)) {
            (Some(x), Some(y)) => return self.constant(x ^ y),
            (Some(x), None) => return if x { !b } else { b },
            (None, Some(y)) => return if y { !a } else { a },
            _ => {}
        }
        if a == b {
            return self.false_lit();
        }
        if a == !b {
            return self.true_lit();
        }
        // Normalize: positive literals, sorted, with parity on the output.
        let parity = a.is_neg() ^ b.is_neg();
        let (pa, pb) = (a.var().pos(), b.var().pos());
        let (pa, pb) = if pa < pb { (pa, pb) } else { (pb, pa) };
        let key = Node::Xor(pa, pb);
        let y = match self.strash.get(&key) {
            Some(l) => *l,
            None => {
                let y = self.solver.new_var().pos();
                self.add_clause(&[!y, pa, pb]);
                self.add_clause(&[!y, !pa, !pb]);
                self.add_clause(&[y, !pa, pb]);
                self.add_clause(&[y, pa, !pb]);
                self.strash.insert(key, y);
                y
            }
        };
        if parity {
            !y
        } else {
            y
        }
    }

    pub fn xor_many(&mut self, ins: &[Lit]) -> Lit {
        let mut acc = self.false_lit();
        for &l in ins {
            acc = self.xor(acc, l);
        }
        acc
    }

    /// `a == b` as a literal.
    pub fn equal(&mut self, a: Lit, b: Lit) -> Lit {
        !self.xor(a, b)
    }

    pub fn gate(&mut self, kind: GateKind, ins: &[Lit]) -> Lit {
        match kind {
            GateKind::And => self.and(ins),
            GateKind::Nand => !self.and(ins),
            GateKind::Or => self.or(ins),
            GateKind::Nor => !self.or(ins),
            GateKind::Xor => self.xor_many(ins),
            GateKind::Xnor => !self.xor_many(ins),
            GateKind::Inv => !ins[0],
            GateKind::Buf => ins[0],
            GateKind::Const0 => self.false_lit(),
            GateKind::Const1 => self.true_lit(),
        }
    }

    /// Encodes `c` with `ports[i]` driving port `i` (inputs ++ key inputs).
    /// Returns one literal per net; nets outside `mask` (when given) are left
    /// as the false constant and must not be used.
    pub fn encode_circuit(&mut self, c: &Circuit, ports: &[Lit], mask: Option<&[bool]>) -> Vec<Lit> {
        assert_eq!(ports.len(), c.num_ports(), "port literal count");
        let mut lits = vec![self.false_lit(); c.num_nets()];
        for (i, p) in c.ports().enumerate() {
            lits[p.index()] = ports[i];
        }
        let mut buf = Vec::new();
        for g in c.topo_order() {
            let g = c.gate(*g);
            if let Some(m) = mask {
                if !m[g.output.index()] {
                    continue;
                }
            }
            buf.clear();
            buf.extend(g.inputs.iter().map(|i| lits[i.index()]));
            lits[g.output.index()] = self.gate(g.kind, &buf);
        }
        lits
    }

    /// Fresh unconstrained literals, one per port.
    pub fn fresh_ports(&mut self, n: usize) -> Vec<Lit> {
        (0..n).map(|_| self.solver.new_var().pos()).collect()
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> SatResult {
        self.solver.solve_with(assumptions)
    }

    pub fn value(&self, l: Lit) -> bool {
        if let Some(v) = self.as_const(l) {
            return v;
        }
        self.solver.model_value(l)
    }
}

/// A standalone CNF for one circuit: clauses plus the literal of each net.
#[derive(Clone, Debug)]
pub struct CnfInstance {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
    pub port_lits: Vec<Lit>,
    pub output_lits: Vec<Lit>,
    pub net_lits: Vec<Lit>,
}

pub fn encode(c: &Circuit) -> CnfInstance {
    let mut e = Encoder::recording();
    let ports = e.fresh_ports(c.num_ports());
    let nets = e.encode_circuit(c, &ports, None);
    CnfInstance {
        num_vars: e.solver.num_vars(),
        clauses: e.recorded_clauses().unwrap().to_vec(),
        output_lits: c.outputs().iter().map(|o| nets[o.index()]).collect(),
        port_lits: ports,
        net_lits: nets,
    }
}

impl CnfInstance {
    pub fn net_lit(&self, n: NetId) -> Lit {
        self.net_lits[n.index()]
    }

    pub fn to_solver(&self) -> Solver {
        let mut s = Solver::new();
        for _ in 0..self.num_vars {
            s.new_var();
        }
        for c in &self.clauses {
            s.add_clause(c);
        }
        s
    }
}
