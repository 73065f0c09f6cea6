//! Graph queries over a [`Circuit`].

use super::{Circuit, CircuitBuilder, GateId, GateKind, NetId, NetlistError, Result};

/// Dense fixed-width bitset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Bitset {
    words: Vec<u64>,
}

impl Bitset {
    pub fn new(bits: usize) -> Self {
        Bitset {
            words: vec![0; bits.div_ceil(64)],
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn union_with(&mut self, other: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn is_subset(&self, other: &Bitset) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, w)| {
            let mut w = *w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }
}

/// Startpoint and endpoint sets for every net, computed in one forward and
/// one backward topological sweep.
#[derive(Clone, Debug)]
pub struct SupportMap {
    /// Per net: bits over port indices (inputs ++ key inputs).
    pub starts: Vec<Bitset>,
    /// Per net: bits over output positions.
    pub ends: Vec<Bitset>,
}

impl SupportMap {
    pub fn compute(c: &Circuit) -> Self {
        let n = c.num_nets();
        let mut starts = vec![Bitset::new(c.num_ports()); n];
        for (i, p) in c.ports().enumerate() {
            starts[p.index()].set(i);
        }
        for g in c.topo_order() {
            let g = c.gate(*g);
            let mut acc = Bitset::new(c.num_ports());
            for i in &g.inputs {
                acc.union_with(&starts[i.index()]);
            }
            starts[g.output.index()] = acc;
        }
        let mut ends = vec![Bitset::new(c.outputs().len()); n];
        for (i, o) in c.outputs().iter().enumerate() {
            ends[o.index()].set(i);
        }
        for g in c.topo_order().iter().rev() {
            let g = c.gate(*g);
            let e = ends[g.output.index()].clone();
            for i in &g.inputs {
                ends[i.index()].union_with(&e);
            }
        }
        SupportMap { starts, ends }
    }

    pub fn startpoints(&self, c: &Circuit, n: NetId) -> Vec<NetId> {
        let ports: Vec<NetId> = c.ports().collect();
        self.starts[n.index()].iter().map(|i| ports[i]).collect()
    }

    pub fn endpoints(&self, c: &Circuit, n: NetId) -> Vec<NetId> {
        self.ends[n.index()].iter().map(|i| c.outputs()[i]).collect()
    }
}

/// Position of `item` in `list`.
pub fn get_index<T: PartialEq>(list: &[T], item: &T) -> Option<usize> {
    list.iter().position(|x| x == item)
}

impl Circuit {
    fn check(&self, n: NetId) -> Result<()> {
        if n.index() < self.num_nets() {
            Ok(())
        } else {
            Err(NetlistError::UnknownNet(format!("#{}", n.0)))
        }
    }

    /// Marks every net in the transitive fanin of `n` (including `n`).
    pub fn fanin_mask(&self, n: NetId) -> Vec<bool> {
        let mut seen = vec![false; self.num_nets()];
        let mut stack = vec![n];
        seen[n.index()] = true;
        while let Some(x) = stack.pop() {
            if let Some(g) = self.driver(x) {
                for i in &self.gate(g).inputs {
                    if !seen[i.index()] {
                        seen[i.index()] = true;
                        stack.push(*i);
                    }
                }
            }
        }
        seen
    }

    /// Marks every net in the transitive fanout of `n` (including `n`).
    pub fn fanout_mask(&self, n: NetId) -> Vec<bool> {
        let mut seen = vec![false; self.num_nets()];
        let mut stack = vec![n];
        seen[n.index()] = true;
        while let Some(x) = stack.pop() {
            for g in self.fanout(x) {
                let o = self.gate(*g).output;
                if !seen[o.index()] {
                    seen[o.index()] = true;
                    stack.push(o);
                }
            }
        }
        seen
    }

    /// PIs and KIs in the transitive fanin of `n`, in port order.
    pub fn startpoints(&self, n: NetId) -> Result<Vec<NetId>> {
        self.check(n)?;
        let m = self.fanin_mask(n);
        Ok(self.ports().filter(|p| m[p.index()]).collect())
    }

    /// POs in the transitive fanout of `n`, in output order.
    pub fn endpoints(&self, n: NetId) -> Result<Vec<NetId>> {
        self.check(n)?;
        let m = self.fanout_mask(n);
        Ok(self.outputs().iter().copied().filter(|o| m[o.index()]).collect())
    }

    /// Nets of the fanin cone of `o` in topological order (ports first).
    pub fn net_conn(&self, o: NetId) -> Result<Vec<NetId>> {
        self.check(o)?;
        let m = self.fanin_mask(o);
        let mut v: Vec<NetId> = self.ports().filter(|p| m[p.index()]).collect();
        v.extend(
            self.topo_order()
                .iter()
                .map(|g| self.gate(*g).output)
                .filter(|n| m[n.index()]),
        );
        Ok(v)
    }

    /// Gates directly driven by `n`.
    pub fn gate_conn(&self, n: NetId) -> Result<Vec<GateId>> {
        self.check(n)?;
        let f = self.fanout(n);
        if f.is_empty() {
            return Err(NetlistError::EmptyFanout(self.net_name(n).to_string()));
        }
        Ok(f.to_vec())
    }

    pub fn tech_mapping(&self, g: GateId) -> GateKind {
        self.gate(g).kind
    }

    /// Transitive-fanout gates of `n` in topological order.
    pub fn fanout_cells(&self, n: NetId) -> Result<Vec<GateId>> {
        self.check(n)?;
        let m = self.fanout_mask(n);
        Ok(self
            .topo_order()
            .iter()
            .copied()
            .filter(|g| {
                let g = self.gate(*g);
                m[g.output.index()] && g.inputs.iter().any(|i| m[i.index()])
            })
            .collect())
    }

    /// Transitive-fanin gates of `n` in topological order.
    pub fn cone_gates(&self, n: NetId) -> Vec<GateId> {
        let m = self.fanin_mask(n);
        self.topo_order()
            .iter()
            .copied()
            .filter(|g| m[self.gate(*g).output.index()])
            .collect()
    }

    /// The fanin cone of `n` as a standalone circuit with single output `n`.
    pub fn extract_cone(&self, n: NetId) -> Result<Circuit> {
        self.extract_cones(&[n])
    }

    /// The union of fanin cones of `roots`, with those roots as outputs.
    pub fn extract_cones(&self, roots: &[NetId]) -> Result<Circuit> {
        let mut m = vec![false; self.num_nets()];
        for r in roots {
            self.check(*r)?;
            for (i, b) in self.fanin_mask(*r).into_iter().enumerate() {
                m[i] |= b;
            }
        }
        let mut b = CircuitBuilder::new(format!("{}_cone", self.name()));
        for p in self.ports().filter(|p| m[p.index()]) {
            b.add_input(self.net_name(p));
        }
        for g in self.topo_order() {
            let g = self.gate(*g);
            if m[g.output.index()] {
                let ins: Vec<&str> = g.inputs.iter().map(|i| self.net_name(*i)).collect();
                b.add_named_gate(&g.name, g.kind, self.net_name(g.output), &ins);
            }
        }
        for r in roots {
            b.add_output(self.net_name(*r));
        }
        b.build()
    }
}

#[cfg(test)]
mod tests {
    use crate::netlist::parse_bench;

    const NOR_PROBE: &str = "INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(d)\nINPUT(e)\nOUTPUT(O1)\n\
        n1 = AND(a, b)\nn2 = OR(c, d)\nO1 = NOR(n1, n2)\n";

    #[test]
    fn start_and_end_points() {
        let c = parse_bench(NOR_PROBE).unwrap();
        let n1 = c.net("n1").unwrap();
        let names = |v: Vec<_>| v.into_iter().map(|n| c.net_name(n).to_string()).collect::<Vec<_>>();
        assert_eq!(names(c.startpoints(n1).unwrap()), vec!["a", "b"]);
        assert_eq!(names(c.endpoints(n1).unwrap()), vec!["O1"]);
        let a = c.net("a").unwrap();
        assert_eq!(names(c.startpoints(a).unwrap()), vec!["a"]);
        let o = c.net("O1").unwrap();
        assert_eq!(names(c.endpoints(o).unwrap()), vec!["O1"]);
    }

    #[test]
    fn cone_of_or() {
        let c = parse_bench(NOR_PROBE).unwrap();
        let cone = c.extract_cone(c.net("n2").unwrap()).unwrap();
        assert_eq!(cone.num_gates(), 1);
        assert_eq!(cone.gates()[0].kind, super::GateKind::Or);
        assert_eq!(cone.inputs().len(), 2);
    }

    #[test]
    fn dangling_input_has_no_fanout() {
        let c = parse_bench(NOR_PROBE).unwrap();
        assert!(c.gate_conn(c.net("e").unwrap()).is_err());
    }

    #[test]
    fn support_map_matches_queries() {
        let c = parse_bench(NOR_PROBE).unwrap();
        let s = super::SupportMap::compute(&c);
        for n in c.net_ids() {
            assert_eq!(s.startpoints(&c, n), c.startpoints(n).unwrap());
            assert_eq!(s.endpoints(&c, n), c.endpoints(n).unwrap());
        }
    }
}
