use serde::{Deserialize, Serialize};

use crate::netlist::{Circuit, GateId, GateKind, NetId};
use crate::sim::{eval_gate_ternary, Ternary};

/// Number of startpoint assignments that drive a net to a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationCount {
    pub value: u128,
    /// The search stopped at the limit; `value` is a lower bound.
    pub saturated: bool,
}

struct Counter<'a> {
    c: &'a Circuit,
    gates: Vec<GateId>,
    ports: Vec<NetId>,
    vals: Vec<Ternary>,
    target: NetId,
    want: bool,
    limit: u128,
    total: u128,
    saturated: bool,
}

impl Counter<'_> {
    fn resim(&mut self) {
        for g in &self.gates {
            let g = self.c.gate(*g);
            let v = eval_gate_ternary(g.kind, g.inputs.iter().map(|i| self.vals[i.index()]));
            self.vals[g.output.index()] = v;
        }
    }

    fn pick(&self) -> Option<(NetId, bool)> {
        let mut n = self.target;
        let mut v = self.want;
        loop {
            if self.ports.contains(&n) {
                return Some((n, v));
            }
            let g = self.c.gate(self.c.driver(n)?);
            let pick = *g.inputs.iter().find(|i| self.vals[i.index()].is_x())?;
            v = match g.kind {
                GateKind::Inv | GateKind::Nand | GateKind::Nor => !v,
                GateKind::Xor | GateKind::Xnor => {
                    let mut p = v ^ (g.kind == GateKind::Xnor);
                    for i in &g.inputs {
                        if *i != pick {
                            p ^= self.vals[i.index()].to_bool().unwrap_or(false);
                        }
                    }
                    p
                }
                _ => v,
            };
            n = pick;
        }
    }

    fn add(&mut self, free: u32) {
        let inc = 1u128.checked_shl(free).unwrap_or(u128::MAX);
        self.total = self.total.saturating_add(inc);
        if self.total >= self.limit {
            self.total = self.total.min(self.limit);
            self.saturated = true;
        }
    }

    fn search(&mut self, free: u32) {
        if self.saturated {
            return;
        }
        self.resim();
        match self.vals[self.target.index()].to_bool() {
            Some(b) if b == self.want => return self.add(free),
            Some(_) => return,
            None => {}
        }
        let Some((p, v)) = self.pick() else { return };
        for value in [v, !v] {
            self.vals[p.index()] = Ternary::from_bool(value);
            self.search(free - 1);
            if self.saturated {
                break;
            }
        }
        self.vals[p.index()] = Ternary::X;
    }
}

/// Counts assignments to the startpoints of `net` that set it to `value`,
/// stopping once `limit` is reached.
pub fn count_activations(c: &Circuit, net: NetId, value: bool, limit: u128) -> ActivationCount {
    let mask = c.fanin_mask(net);
    let ports: Vec<NetId> = c.ports().filter(|p| mask[p.index()]).collect();
    let mut k = Counter {
        c,
        gates: c.cone_gates(net),
        vals: vec![Ternary::X; c.num_nets()],
        target: net,
        want: value,
        limit: limit.max(1),
        total: 0,
        saturated: false,
        ports,
    };
    let free = k.ports.len() as u32;
    k.search(free);
    ActivationCount {
        value: k.total,
        saturated: k.saturated,
    }
}
