//! PODEM over composite good/faulty ternary values, run as a complete
//! enumeration of the decision tree.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{subtract_all, AtpgOptions, DetectChecker, Fault, Region};
use crate::netlist::{Circuit, GateId, GateKind, NetId};
use crate::sim::{eval_gate_ternary, Ternary, TernaryPattern};

pub(super) struct Outcome {
    pub cubes: Vec<TernaryPattern>,
    pub complete: bool,
    pub budget_exhausted: bool,
}

struct State<'a> {
    c: &'a Circuit,
    fault: Fault,
    region: &'a Region,
    good: Vec<Ternary>,
    bad: Vec<Ternary>,
    trail: Vec<(u32, Ternary, Ternary)>,
    assign: TernaryPattern,
    topo_pos: Vec<u32>,
    queued: Vec<bool>,
    decisions: u64,
    max_decisions: u64,
    max_patterns: usize,
    cubes: Vec<TernaryPattern>,
    live: Vec<bool>,
    fo_gates: Vec<GateId>,
}

enum Flow {
    Continue,
    Stop,
    Budget,
}

impl<'a> State<'a> {
    fn set(&mut self, n: NetId, g: Ternary, b: Ternary) {
        let i = n.index();
        if self.good[i] != g || self.bad[i] != b {
            self.trail.push((i as u32, self.good[i], self.bad[i]));
            self.good[i] = g;
            self.bad[i] = b;
        }
    }

    fn eval(&self, gid: GateId) -> (Ternary, Ternary) {
        let g = self.c.gate(gid);
        let gv = eval_gate_ternary(g.kind, g.inputs.iter().map(|i| self.good[i.index()]));
        let bv = if g.output == self.fault.net {
            Ternary::from_bool(self.fault.stuck_at)
        } else if self.region.in_fanout[g.output.index()] {
            eval_gate_ternary(g.kind, g.inputs.iter().map(|i| self.bad[i.index()]))
        } else {
            gv
        };
        (gv, bv)
    }

    fn propagate_from(&mut self, n: NetId) {
        let mut heap = BinaryHeap::new();
        for g in self.c.fanout(n) {
            if self.region.in_region[self.c.gate(*g).output.index()] && !self.queued[g.index()] {
                self.queued[g.index()] = true;
                heap.push(Reverse((self.topo_pos[g.index()], g.0)));
            }
        }
        while let Some(Reverse((_, gi))) = heap.pop() {
            let gid = GateId(gi);
            self.queued[gid.index()] = false;
            let (gv, bv) = self.eval(gid);
            let o = self.c.gate(gid).output;
            if self.good[o.index()] == gv && self.bad[o.index()] == bv {
                continue;
            }
            self.set(o, gv, bv);
            for g in self.c.fanout(o) {
                if self.region.in_region[self.c.gate(*g).output.index()] && !self.queued[g.index()] {
                    self.queued[g.index()] = true;
                    heap.push(Reverse((self.topo_pos[g.index()], g.0)));
                }
            }
        }
    }

    fn assign_port(&mut self, port: usize, v: bool) {
        let n = self.c.ports().nth(port).unwrap();
        self.assign.set(port, Ternary::from_bool(v));
        let t = Ternary::from_bool(v);
        let b = if n == self.fault.net {
            Ternary::from_bool(self.fault.stuck_at)
        } else {
            t
        };
        self.set(n, t, b);
        self.propagate_from(n);
    }

    fn undo_to(&mut self, mark: usize, port: usize) {
        while self.trail.len() > mark {
            let (i, g, b) = self.trail.pop().unwrap();
            self.good[i as usize] = g;
            self.bad[i as usize] = b;
        }
        self.assign.set(port, Ternary::X);
    }

    fn definite_diff(&self, n: NetId) -> bool {
        let i = n.index();
        matches!(
            (self.good[i].to_bool(), self.bad[i].to_bool()),
            (Some(a), Some(b)) if a != b
        )
    }

    fn possible_diff(&self, n: NetId) -> bool {
        let i = n.index();
        !matches!(
            (self.good[i].to_bool(), self.bad[i].to_bool()),
            (Some(a), Some(b)) if a == b
        )
    }

    fn detected(&self) -> bool {
        self.region.outputs.iter().any(|o| self.definite_diff(*o))
    }

    /// Marks nets that can still carry a difference to an output.
    fn compute_live(&mut self) -> bool {
        for g in self.fo_gates.iter().rev() {
            let o = self.c.gate(*g).output;
            let pd = self.possible_diff(o);
            let reach = self.region.outputs.contains(&o)
                || self
                    .c
                    .fanout(o)
                    .iter()
                    .any(|s| self.live[self.c.gate(*s).output.index()]);
            self.live[o.index()] = pd && reach;
        }
        let site = self.fault.net;
        if self.c.driver(site).is_none() {
            let pd = self.possible_diff(site);
            let reach = self.region.outputs.contains(&site)
                || self
                    .c
                    .fanout(site)
                    .iter()
                    .any(|s| self.live[self.c.gate(*s).output.index()]);
            self.live[site.index()] = pd && reach;
        }
        self.live[site.index()]
    }

    fn objective(&self) -> Option<(NetId, bool)> {
        let site = self.fault.net;
        if self.good[site.index()].is_x() {
            return Some((site, !self.fault.stuck_at));
        }
        for gid in &self.fo_gates {
            let g = self.c.gate(*gid);
            if !self.live[g.output.index()] || self.definite_diff(g.output) {
                continue;
            }
            if !g.inputs.iter().any(|i| self.definite_diff(*i)) {
                continue;
            }
            let want = match g.kind {
                GateKind::And | GateKind::Nand => true,
                _ => false,
            };
            if let Some(i) = g.inputs.iter().find(|i| self.good[i.index()].is_x()) {
                return Some((*i, want));
            }
            if let Some(i) = g.inputs.iter().find(|i| self.bad[i.index()].is_x()) {
                return Some((*i, want));
            }
        }
        None
    }

    fn backtrace(&self, mut n: NetId, mut v: bool) -> Option<(usize, bool)> {
        loop {
            if let Some(p) = self.c.port_index(n) {
                return if self.assign.get(p).is_x() { Some((p, v)) } else { None };
            }
            let g = self.c.gate(self.c.driver(n)?);
            let pick = g
                .inputs
                .iter()
                .find(|i| self.good[i.index()].is_x())
                .or_else(|| g.inputs.iter().find(|i| self.bad[i.index()].is_x()))?;
            v = match g.kind {
                GateKind::Inv | GateKind::Nand | GateKind::Nor => !v,
                GateKind::Xor | GateKind::Xnor => {
                    let mut p = v ^ (g.kind == GateKind::Xnor);
                    for i in &g.inputs {
                        if i != pick {
                            p ^= self.good[i.index()].to_bool().unwrap_or(false);
                        }
                    }
                    p
                }
                _ => v,
            };
            n = *pick;
        }
    }

    fn leaf(&mut self, checker: &mut DetectChecker) -> Flow {
        let mut pending = subtract_all(&self.assign, &self.cubes);
        while let Some(p) = pending.pop() {
            if self.cubes.iter().any(|e| e.intersects(&p)) {
                pending.extend(subtract_all(&p, &self.cubes));
                continue;
            }
            let lifted = checker.lift(&p, &self.cubes);
            self.cubes.push(lifted);
            if self.cubes.len() >= self.max_patterns {
                return Flow::Stop;
            }
        }
        Flow::Continue
    }

    fn search(&mut self, checker: &mut DetectChecker) -> Flow {
        if self.cubes.iter().any(|e| e.contains(&self.assign)) {
            return Flow::Continue;
        }
        if self.detected() {
            return self.leaf(checker);
        }
        if !self.compute_live() {
            return Flow::Continue;
        }
        let Some((net, val)) = self.objective() else {
            return Flow::Continue;
        };
        let Some((port, v)) = self.backtrace(net, val) else {
            return Flow::Continue;
        };
        for value in [v, !v] {
            self.decisions += 1;
            if self.decisions > self.max_decisions {
                return Flow::Budget;
            }
            let mark = self.trail.len();
            self.assign_port(port, value);
            let r = self.search(checker);
            self.undo_to(mark, port);
            match r {
                Flow::Continue => {}
                other => return other,
            }
        }
        Flow::Continue
    }
}

pub(super) fn enumerate(
    c: &Circuit,
    fault: Fault,
    region: &Region,
    checker: &mut DetectChecker,
    opts: &AtpgOptions,
) -> Outcome {
    let mut topo_pos = vec![0u32; c.num_gates()];
    for (i, g) in c.topo_order().iter().enumerate() {
        topo_pos[g.index()] = i as u32;
    }
    let fo_gates: Vec<GateId> = c
        .topo_order()
        .iter()
        .copied()
        .filter(|g| {
            let o = c.gate(*g).output.index();
            region.in_fanout[o] && region.in_region[o]
        })
        .collect();
    let mut st = State {
        c,
        fault,
        region,
        good: vec![Ternary::X; c.num_nets()],
        bad: vec![Ternary::X; c.num_nets()],
        trail: Vec::new(),
        assign: TernaryPattern::all_x(c.num_ports()),
        topo_pos,
        queued: vec![false; c.num_gates()],
        decisions: 0,
        max_decisions: opts.max_decisions,
        max_patterns: opts.max_patterns,
        cubes: Vec::new(),
        live: vec![false; c.num_nets()],
        fo_gates,
    };
    // Constants and gates with no inputs settle before any decision.
    for g in c.topo_order() {
        if region.in_region[c.gate(*g).output.index()] {
            let (gv, bv) = st.eval(*g);
            let o = c.gate(*g).output;
            st.good[o.index()] = gv;
            st.bad[o.index()] = bv;
        }
    }
    if c.driver(fault.net).is_none() {
        st.bad[fault.net.index()] = Ternary::from_bool(fault.stuck_at);
        for g in c.topo_order() {
            if region.in_fanout[c.gate(*g).output.index()] {
                let (gv, bv) = st.eval(*g);
                let o = c.gate(*g).output;
                st.good[o.index()] = gv;
                st.bad[o.index()] = bv;
            }
        }
    }
    st.trail.clear();
    match st.search(checker) {
        Flow::Continue => Outcome {
            cubes: st.cubes,
            complete: true,
            budget_exhausted: false,
        },
        Flow::Stop => {
            // Budget of patterns reached: ask SAT whether anything is left.
            let more = super::satgen::has_more(checker, &st.cubes);
            Outcome {
                cubes: st.cubes,
                complete: !more,
                budget_exhausted: false,
            }
        }
        Flow::Budget => Outcome {
            cubes: st.cubes,
            complete: false,
            budget_exhausted: true,
        },
    }
}
