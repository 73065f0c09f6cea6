use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::netlist::{CircuitBuilder, GateKind};

/// Replacement used for a diversified first-level comparator gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DtlGate {
    /// OR followed by an inverter; the leaves activate on mismatch.
    Or,
    /// NAND followed by an inverter; same function as AND.
    Nand,
    /// NOR; the leaves activate on mismatch.
    Nor,
}

impl DtlGate {
    pub fn parse(s: &str) -> Option<DtlGate> {
        match s.to_ascii_lowercase().as_str() {
            "or" => Some(DtlGate::Or),
            "nand" => Some(DtlGate::Nand),
            "nor" => Some(DtlGate::Nor),
            _ => None,
        }
    }

    fn inverts_leaves(self) -> bool {
        !matches!(self, DtlGate::Nand)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Shape {
    Balanced,
    Chain,
}

/// A point-function tree over `leaves`: true exactly when every leaf is 1,
/// except that leaves under a diversified pair must be 0. Returns the root
/// and, per leaf, whether its active value was inverted.
pub(crate) fn and_tree(
    b: &mut CircuitBuilder,
    leaves: &[String],
    shape: Shape,
    dtl: &[Option<DtlGate>],
) -> (String, Vec<bool>) {
    let mut flipped = vec![false; leaves.len()];
    if leaves.len() == 1 {
        return (leaves[0].clone(), flipped);
    }
    let mut level: Vec<String> = Vec::new();
    for (j, pair) in leaves.chunks(2).enumerate() {
        if pair.len() == 1 {
            level.push(pair[0].clone());
            continue;
        }
        let out = match dtl.get(j).copied().flatten() {
            None => b.gate(GateKind::And, "lk_t", pair),
            Some(DtlGate::Or) => {
                let o = b.gate(GateKind::Or, "lk_t", pair);
                b.gate(GateKind::Inv, "lk_t", &[o])
            }
            Some(DtlGate::Nand) => {
                let o = b.gate(GateKind::Nand, "lk_t", pair);
                b.gate(GateKind::Inv, "lk_t", &[o])
            }
            Some(DtlGate::Nor) => b.gate(GateKind::Nor, "lk_t", pair),
        };
        if dtl.get(j).copied().flatten().is_some_and(|d| d.inverts_leaves()) {
            flipped[2 * j] = true;
            flipped[2 * j + 1] = true;
        }
        level.push(out);
    }
    let root = combine(b, level, GateKind::And, shape);
    (root, flipped)
}

/// Reduces nets with `kind` gates, either as a balanced tree of fan-in up to
/// four or as a two-input chain.
pub(crate) fn combine(b: &mut CircuitBuilder, mut level: Vec<String>, kind: GateKind, shape: Shape) -> String {
    match shape {
        Shape::Balanced => {
            while level.len() > 1 {
                level = level
                    .chunks(4)
                    .map(|g| {
                        if g.len() == 1 {
                            g[0].clone()
                        } else {
                            b.gate(kind, "lk_t", g)
                        }
                    })
                    .collect();
            }
            level.pop().unwrap()
        }
        Shape::Chain => {
            let mut it = level.into_iter();
            let mut acc = it.next().unwrap();
            for n in it {
                acc = b.gate(kind, "lk_t", &[acc, n]);
            }
            acc
        }
    }
}

/// Picks `count` of the `pairs` first-level gates to diversify.
pub(crate) fn dtl_plan(rng: &mut ChaCha8Rng, pairs: usize, count: usize, gate: DtlGate) -> Vec<Option<DtlGate>> {
    let mut plan = vec![None; pairs];
    let mut idx: Vec<usize> = (0..pairs).collect();
    idx.shuffle(rng);
    for i in idx.into_iter().take(count) {
        plan[i] = Some(gate);
    }
    plan
}

/// Logic tree over key-gate outputs, before the key gates are chosen.
#[derive(Clone, Debug)]
pub(crate) enum Node {
    Leaf(usize),
    Gate(GateKind, Vec<Node>),
}

impl Node {
    /// Inversion parity from each leaf to the root, root gate included.
    pub fn leaf_parity(&self, out: &mut Vec<(usize, bool)>) {
        fn walk(n: &Node, acc: bool, out: &mut Vec<(usize, bool)>) {
            match n {
                Node::Leaf(i) => out.push((*i, acc)),
                Node::Gate(k, ch) => {
                    let inv = matches!(k, GateKind::Nand | GateKind::Nor | GateKind::Inv | GateKind::Xnor);
                    for c in ch {
                        walk(c, acc ^ inv, out);
                    }
                }
            }
        }
        walk(self, false, out);
    }

    pub fn with_root_complemented(&self) -> Node {
        match self {
            Node::Leaf(i) => Node::Gate(GateKind::Inv, vec![Node::Leaf(*i)]),
            Node::Gate(k, ch) => Node::Gate(k.complement(), ch.clone()),
        }
    }

    pub fn emit(&self, b: &mut CircuitBuilder, leaves: &[String]) -> String {
        match self {
            Node::Leaf(i) => leaves[*i].clone(),
            Node::Gate(k, ch) => {
                let ins: Vec<String> = ch.iter().map(|c| c.emit(b, leaves)).collect();
                b.gate(*k, "lk_u", &ins)
            }
        }
    }
}

fn groups_of(n: usize, size: usize) -> Vec<Vec<Node>> {
    (0..n)
        .collect::<Vec<_>>()
        .chunks(size)
        .map(|g| g.iter().map(|i| Node::Leaf(*i)).collect())
        .collect()
}

fn and_of(mut nodes: Vec<Node>) -> Node {
    if nodes.len() == 1 {
        return nodes.pop().unwrap();
    }
    while nodes.len() > 4 {
        nodes = nodes
            .chunks(4)
            .map(|g| if g.len() == 1 { g[0].clone() } else { Node::Gate(GateKind::And, g.to_vec()) })
            .collect();
    }
    Node::Gate(GateKind::And, nodes)
}

/// AND over `n` leaves with fan-in up to four.
pub(crate) fn plain_and(n: usize) -> Node {
    let mut t = and_of(groups_of(n, 4).into_iter().map(and_of).collect());
    if let Node::Leaf(_) = t {
        t = Node::Gate(GateKind::Buf, vec![t]);
    }
    t
}

/// AND of leaf pairs where the pairs listed in `xor_pairs` become XOR gates.
pub(crate) fn pairwise_and(n: usize, xor_pairs: &[bool]) -> Node {
    let mut firsts = Vec::new();
    for (j, pair) in groups_of(n, 2).into_iter().enumerate() {
        if pair.len() == 1 {
            firsts.extend(pair);
        } else if xor_pairs.get(j).copied().unwrap_or(false) {
            firsts.push(Node::Gate(GateKind::Xor, pair));
        } else {
            firsts.push(Node::Gate(GateKind::And, pair));
        }
    }
    let mut t = and_of(firsts);
    if let Node::Leaf(_) = t {
        t = Node::Gate(GateKind::Buf, vec![t]);
    }
    t
}

/// Two-input chain ((l0 op l1) op l2) ... with ops from `config`
/// (true = AND, false = OR).
pub(crate) fn cascade(n: usize, config: &[bool]) -> Node {
    if n == 1 {
        return Node::Gate(GateKind::Buf, vec![Node::Leaf(0)]);
    }
    let kind = |i: usize| if config[i] { GateKind::And } else { GateKind::Or };
    let mut acc = Node::Gate(kind(0), vec![Node::Leaf(0), Node::Leaf(1)]);
    for i in 2..n {
        acc = Node::Gate(kind(i - 1), vec![acc, Node::Leaf(i)]);
    }
    acc
}

/// Random mixed-gate tree with a single activating assignment, whose root is
/// 1 exactly at that assignment.
pub(crate) fn point_tree(rng: &mut ChaCha8Rng, leaves: &[usize]) -> Node {
    fn build(rng: &mut ChaCha8Rng, leaves: &[usize], want_one: bool) -> Node {
        let kind = match (want_one, rng.gen_bool(0.5)) {
            (true, true) => GateKind::And,
            (true, false) => GateKind::Nor,
            (false, true) => GateKind::Nand,
            (false, false) => GateKind::Or,
        };
        let child_want = matches!(kind, GateKind::And | GateKind::Nand);
        let parts = if leaves.len() <= 3 {
            leaves.len()
        } else {
            rng.gen_range(2..=leaves.len().min(4))
        };
        let mut children = Vec::new();
        let mut start = 0;
        for p in 0..parts {
            let remaining = parts - p;
            let left = leaves.len() - start;
            let take = if remaining == 1 {
                left
            } else {
                rng.gen_range(1..=left - (remaining - 1))
            };
            let chunk = &leaves[start..start + take];
            start += take;
            if chunk.len() == 1 {
                children.push(Node::Leaf(chunk[0]));
            } else {
                children.push(build(rng, chunk, child_want));
            }
        }
        if children.len() == 1 {
            // A single child cannot feed a multi-input gate; pass it through.
            return match (children.pop().unwrap(), want_one == child_want) {
                (c, true) => Node::Gate(GateKind::Buf, vec![c]),
                (c, false) => Node::Gate(GateKind::Inv, vec![c]),
            };
        }
        Node::Gate(kind, children)
    }
    let mut order = leaves.to_vec();
    order.shuffle(rng);
    build(rng, &order, true)
}
