//! Binary, ternary and bit-parallel circuit evaluation, plus a query-counting
//! oracle.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::netlist::{Circuit, GateKind, NetId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("expected {expected} port values, got {got}")]
    Width { expected: usize, got: usize },
    #[error("invalid pattern character `{0}`")]
    BadChar(char),
    #[error("oracle expects {expected} input values, got {got}")]
    OracleWidth { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ternary {
    Zero,
    One,
    X,
}

impl Ternary {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Ternary::One
        } else {
            Ternary::Zero
        }
    }

    pub fn to_bool(self) -> Option<bool> {
        match self {
            Ternary::Zero => Some(false),
            Ternary::One => Some(true),
            Ternary::X => None,
        }
    }

    pub fn is_x(self) -> bool {
        self == Ternary::X
    }

    pub fn not(self) -> Self {
        match self {
            Ternary::Zero => Ternary::One,
            Ternary::One => Ternary::Zero,
            Ternary::X => Ternary::X,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Ternary::Zero => '0',
            Ternary::One => '1',
            Ternary::X => 'x',
        }
    }
}

/// Pessimistic three-valued gate evaluation.
pub fn eval_gate_ternary(kind: GateKind, ins: impl IntoIterator<Item = Ternary>) -> Ternary {
    use Ternary::*;
    let and = |it: &mut dyn Iterator<Item = Ternary>| {
        let mut r = One;
        for v in it {
            match v {
                Zero => return Zero,
                X => r = X,
                One => {}
            }
        }
        r
    };
    let or = |it: &mut dyn Iterator<Item = Ternary>| {
        let mut r = Zero;
        for v in it {
            match v {
                One => return One,
                X => r = X,
                Zero => {}
            }
        }
        r
    };
    let xor = |it: &mut dyn Iterator<Item = Ternary>| {
        let mut r = false;
        for v in it {
            match v.to_bool() {
                Some(b) => r ^= b,
                None => return X,
            }
        }
        Ternary::from_bool(r)
    };
    let mut it = ins.into_iter();
    match kind {
        GateKind::And => and(&mut it),
        GateKind::Nand => and(&mut it).not(),
        GateKind::Or => or(&mut it),
        GateKind::Nor => or(&mut it).not(),
        GateKind::Xor => xor(&mut it),
        GateKind::Xnor => xor(&mut it).not(),
        GateKind::Inv => it.next().unwrap_or(X).not(),
        GateKind::Buf => it.next().unwrap_or(X),
        GateKind::Const0 => Zero,
        GateKind::Const1 => One,
    }
}

/// Fixed-width vector over {0, 1, x}, written as a string such as `"10x1"`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TernaryPattern(pub Vec<Ternary>);

impl TernaryPattern {
    pub fn all_x(width: usize) -> Self {
        TernaryPattern(vec![Ternary::X; width])
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        TernaryPattern(bits.iter().map(|b| Ternary::from_bool(*b)).collect())
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, i: usize) -> Ternary {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: Ternary) {
        self.0[i] = v;
    }

    pub fn count_x(&self) -> usize {
        self.0.iter().filter(|t| t.is_x()).count()
    }

    pub fn is_fully_specified(&self) -> bool {
        self.count_x() == 0
    }

    /// Binary values, or `None` if any bit is x.
    pub fn to_bools(&self) -> Option<Vec<bool>> {
        self.0.iter().map(|t| t.to_bool()).collect()
    }

    /// Binary values with x replaced by `fill`.
    pub fn fill_x(&self, fill: bool) -> Vec<bool> {
        self.0.iter().map(|t| t.to_bool().unwrap_or(fill)).collect()
    }

    /// True if the minterm lies inside this cube.
    pub fn covers(&self, bits: &[bool]) -> bool {
        self.0
            .iter()
            .zip(bits)
            .all(|(t, b)| t.to_bool().map_or(true, |v| v == *b))
    }

    /// True if every minterm of `other` is a minterm of `self`.
    pub fn contains(&self, other: &TernaryPattern) -> bool {
        self.0
            .iter()
            .zip(&other.0)
            .all(|(a, b)| a.is_x() || a == b)
    }

    /// True if the two cubes share a minterm.
    pub fn intersects(&self, other: &TernaryPattern) -> bool {
        self.0
            .iter()
            .zip(&other.0)
            .all(|(a, b)| a.is_x() || b.is_x() || a == b)
    }

    /// Number of minterms, saturating.
    pub fn minterms(&self) -> u128 {
        let x = self.count_x();
        if x >= 127 {
            u128::MAX
        } else {
            1u128 << x
        }
    }

    /// Every completion of the x bits, in binary-counting order over x positions.
    pub fn completions(&self) -> impl Iterator<Item = Vec<bool>> + '_ {
        let xs: Vec<usize> = (0..self.width()).filter(|i| self.0[*i].is_x()).collect();
        assert!(xs.len() < 64, "too many x bits to enumerate");
        let base = self.fill_x(false);
        (0u64..1 << xs.len()).map(move |m| {
            let mut v = base.clone();
            for (j, i) in xs.iter().enumerate() {
                v[*i] = m >> j & 1 == 1;
            }
            v
        })
    }
}

impl fmt::Display for TernaryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.0 {
            write!(f, "{}", t.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for TernaryPattern {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self, SimError> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != ',' && *c != '_')
            .map(|c| match c {
                '0' => Ok(Ternary::Zero),
                '1' => Ok(Ternary::One),
                'x' | 'X' | '-' => Ok(Ternary::X),
                other => Err(SimError::BadChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(TernaryPattern)
    }
}

impl Serialize for TernaryPattern {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TernaryPattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A single stuck-at fault.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fault {
    pub net: NetId,
    pub stuck_at: bool,
}

impl Fault {
    pub fn new(net: NetId, stuck_at: bool) -> Self {
        Fault { net, stuck_at }
    }
}

fn check_width(c: &Circuit, got: usize) -> Result<(), SimError> {
    if got != c.num_ports() {
        return Err(SimError::Width {
            expected: c.num_ports(),
            got,
        });
    }
    Ok(())
}

fn eval_inner(c: &Circuit, assignment: &[bool], fault: Option<Fault>) -> Vec<bool> {
    let mut v = vec![false; c.num_nets()];
    for (i, p) in c.ports().enumerate() {
        v[p.index()] = assignment[i];
    }
    if let Some(f) = fault {
        v[f.net.index()] = f.stuck_at;
    }
    for g in c.topo_order() {
        let g = c.gate(*g);
        let mut out = g.kind.eval(g.inputs.iter().map(|i| v[i.index()]));
        if let Some(f) = fault {
            if f.net == g.output {
                out = f.stuck_at;
            }
        }
        v[g.output.index()] = out;
    }
    v
}

/// Values on every net for a full assignment over inputs ++ key inputs.
pub fn eval_nets(c: &Circuit, assignment: &[bool]) -> Result<Vec<bool>, SimError> {
    check_width(c, assignment.len())?;
    Ok(eval_inner(c, assignment, None))
}

/// Output values for a full assignment over inputs ++ key inputs.
pub fn eval(c: &Circuit, assignment: &[bool]) -> Result<Vec<bool>, SimError> {
    let v = eval_nets(c, assignment)?;
    Ok(c.outputs().iter().map(|o| v[o.index()]).collect())
}

pub fn eval_faulty(c: &Circuit, fault: Fault, assignment: &[bool]) -> Result<Vec<bool>, SimError> {
    check_width(c, assignment.len())?;
    let v = eval_inner(c, assignment, Some(fault));
    Ok(c.outputs().iter().map(|o| v[o.index()]).collect())
}

pub fn eval_ternary_nets(c: &Circuit, assignment: &TernaryPattern) -> Result<Vec<Ternary>, SimError> {
    check_width(c, assignment.width())?;
    let mut v = vec![Ternary::X; c.num_nets()];
    for (i, p) in c.ports().enumerate() {
        v[p.index()] = assignment.get(i);
    }
    for g in c.topo_order() {
        let g = c.gate(*g);
        v[g.output.index()] = eval_gate_ternary(g.kind, g.inputs.iter().map(|i| v[i.index()]));
    }
    Ok(v)
}

pub fn eval_ternary(c: &Circuit, assignment: &TernaryPattern) -> Result<TernaryPattern, SimError> {
    let v = eval_ternary_nets(c, assignment)?;
    Ok(TernaryPattern(c.outputs().iter().map(|o| v[o.index()]).collect()))
}

/// Evaluates 64 patterns at once; `words[i]` holds port `i` across patterns.
/// Returns one word per net.
pub fn eval_words(c: &Circuit, words: &[u64]) -> Result<Vec<u64>, SimError> {
    check_width(c, words.len())?;
    let mut v = vec![0u64; c.num_nets()];
    for (i, p) in c.ports().enumerate() {
        v[p.index()] = words[i];
    }
    for g in c.topo_order() {
        let g = c.gate(*g);
        v[g.output.index()] = g.kind.eval_words(g.inputs.iter().map(|i| v[i.index()]));
    }
    Ok(v)
}

/// Full truth table of every output for circuits with at most 20 ports.
/// Row `m` assigns port `i` the bit `(m >> i) & 1`.
pub fn truth_table(c: &Circuit) -> Vec<Vec<bool>> {
    let n = c.num_ports();
    assert!(n <= 20, "truth table limited to 20 ports");
    let rows = 1usize << n;
    let mut out = vec![vec![false; rows]; c.outputs().len()];
    let mut base = 0usize;
    while base < rows {
        let words: Vec<u64> = (0..n)
            .map(|i| {
                let mut w = 0u64;
                for j in 0..64.min(rows - base) {
                    if ((base + j) >> i) & 1 == 1 {
                        w |= 1 << j;
                    }
                }
                w
            })
            .collect();
        let v = eval_words(c, &words).expect("width");
        for (oi, o) in c.outputs().iter().enumerate() {
            for j in 0..64.min(rows - base) {
                out[oi][base + j] = v[o.index()] >> j & 1 == 1;
            }
        }
        base += 64;
    }
    out
}

/// A working chip: answers input queries with the key hidden inside.
#[derive(Debug)]
pub struct Oracle {
    circuit: Circuit,
    key: Option<Vec<bool>>,
    queries: AtomicU64,
}

impl Oracle {
    /// Oracle over an unlocked circuit (no key inputs are expected).
    pub fn new(circuit: Circuit) -> Self {
        Oracle {
            circuit,
            key: None,
            queries: AtomicU64::new(0),
        }
    }

    /// Oracle over a locked circuit with the correct key spliced in.
    pub fn with_key(circuit: Circuit, key: Vec<bool>) -> Self {
        assert_eq!(key.len(), circuit.key_inputs().len(), "key width");
        Oracle {
            circuit,
            key: Some(key),
            queries: AtomicU64::new(0),
        }
    }

    pub fn num_inputs(&self) -> usize {
        self.circuit.inputs().len()
    }

    pub fn num_outputs(&self) -> usize {
        self.circuit.outputs().len()
    }

    pub fn output_names(&self) -> Vec<String> {
        self.circuit
            .outputs()
            .iter()
            .map(|o| self.circuit.net_name(*o).to_string())
            .collect()
    }

    pub fn query(&self, input: &[bool]) -> Result<Vec<bool>, SimError> {
        if input.len() != self.num_inputs() {
            return Err(SimError::OracleWidth {
                expected: self.num_inputs(),
                got: input.len(),
            });
        }
        self.queries.fetch_add(1, Ordering::Relaxed);
        let mut a = input.to_vec();
        match &self.key {
            Some(k) => a.extend_from_slice(k),
            None => a.extend(std::iter::repeat(false).take(self.circuit.key_inputs().len())),
        }
        eval(&self.circuit, &a)
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}
