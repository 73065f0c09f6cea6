//! Conflict-driven clause-learning SAT solver with incremental assumptions.

use std::ops::Not;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn pos(self) -> Lit {
        Lit(self.0 << 1)
    }

    #[inline]
    pub fn neg(self) -> Lit {
        Lit(self.0 << 1 | 1)
    }

    #[inline]
    pub fn lit(self, value: bool) -> Lit {
        if value {
            self.pos()
        } else {
            self.neg()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(pub u32);

impl Lit {
    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    fn index(self) -> usize {
        self.0 as usize
    }

    /// DIMACS integer form (1-based, negative for negated).
    pub fn to_dimacs(self) -> i64 {
        let v = self.var().0 as i64 + 1;
        if self.is_neg() {
            -v
        } else {
            v
        }
    }

    pub fn from_dimacs(x: i64) -> Lit {
        let v = Var((x.unsigned_abs() - 1) as u32);
        if x < 0 {
            v.neg()
        } else {
            v.pos()
        }
    }
}

impl Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
    /// Conflict budget exhausted.
    Unknown,
}

const UNDEF: u8 = 2;
const NO_REASON: u32 = u32::MAX;
// Clause header: [len, lbd | learnt << 30 | deleted << 31, activity bits]
const HDR: usize = 3;
const LEARNT: u32 = 1 << 30;
const DELETED: u32 = 1 << 31;

#[derive(Clone, Copy, Debug)]
struct Watcher {
    cref: u32,
    blocker: Lit,
}

#[derive(Clone, Debug, Default)]
struct Heap {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

impl Heap {
    fn contains(&self, v: u32) -> bool {
        self.pos.get(v as usize).map_or(false, |p| *p >= 0)
    }

    fn grow(&mut self, n: usize) {
        if self.pos.len() < n {
            self.pos.resize(n, -1);
        }
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if act[self.heap[p] as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[p];
            self.pos[self.heap[i] as usize] = i as i32;
            i = p;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] {
                r
            } else {
                l
            };
            if act[self.heap[c] as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = i as i32;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        self.grow(v as usize + 1);
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = i as i32;
        self.up(i, act);
    }

    fn bump(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            let i = self.pos[v as usize] as usize;
            self.up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.down(0, act);
        }
        Some(top)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Stats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub solves: u64,
}

#[derive(Clone, Debug)]
pub struct Solver {
    arena: Vec<u32>,
    clauses: Vec<u32>,
    learnts: Vec<u32>,
    wasted: usize,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    polarity: Vec<bool>,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f32,
    heap: Heap,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<u8>,
    ok: bool,
    model: Vec<bool>,
    max_learnts: f64,
    conflict_budget: Option<u64>,
    lbd_stamp: Vec<u64>,
    lbd_counter: u64,
    pub stats: Stats,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

fn luby(y: f64, mut x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0i32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            arena: Vec::new(),
            clauses: Vec::new(),
            learnts: Vec::new(),
            wasted: 0,
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            polarity: Vec::new(),
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: Heap::default(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: Vec::new(),
            ok: true,
            model: Vec::new(),
            max_learnts: 0.0,
            conflict_budget: None,
            lbd_stamp: Vec::new(),
            lbd_counter: 0,
            stats: Stats::default(),
        }
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.assigns.len() as u32);
        self.assigns.push(UNDEF);
        self.level.push(0);
        self.reason.push(NO_REASON);
        self.polarity.push(false);
        self.activity.push(0.0);
        self.seen.push(0);
        self.lbd_stamp.push(0);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.insert(v.0, &self.activity);
        v
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Limits the number of conflicts per solve call; `None` removes the limit.
    pub fn set_conflict_budget(&mut self, budget: Option<u64>) {
        self.conflict_budget = budget;
    }

    /// Sets the initial decision polarity of a variable.
    pub fn set_polarity(&mut self, v: Var, value: bool) {
        self.polarity[v.index()] = value;
    }

    #[inline]
    fn lit_value(&self, l: Lit) -> u8 {
        let a = self.assigns[l.var().index()];
        if a == UNDEF {
            UNDEF
        } else {
            a ^ (l.is_neg() as u8)
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Value fixed at the root level, if any.
    pub fn fixed_value(&self, l: Lit) -> Option<bool> {
        let v = l.var().index();
        if self.assigns[v] != UNDEF && self.level[v] == 0 {
            Some(self.lit_value(l) == 1)
        } else {
            None
        }
    }

    /// Value of a literal in the last satisfying assignment.
    pub fn model_value(&self, l: Lit) -> bool {
        self.model[l.var().index()] ^ l.is_neg()
    }

    pub fn is_ok(&self) -> bool {
        self.ok
    }

    fn alloc(&mut self, lits: &[Lit], learnt: bool, lbd: u32) -> u32 {
        let cref = self.arena.len() as u32;
        self.arena.push(lits.len() as u32);
        self.arena.push(lbd.min(LEARNT - 1) | if learnt { LEARNT } else { 0 });
        self.arena.push(0f32.to_bits());
        self.arena.extend(lits.iter().map(|l| l.0));
        cref
    }

    #[inline]
    fn clen(&self, c: u32) -> usize {
        self.arena[c as usize] as usize
    }

    #[inline]
    fn clit(&self, c: u32, i: usize) -> Lit {
        Lit(self.arena[c as usize + HDR + i])
    }

    fn attach(&mut self, c: u32) {
        let l0 = self.clit(c, 0);
        let l1 = self.clit(c, 1);
        self.watches[(!l0).index()].push(Watcher { cref: c, blocker: l1 });
        self.watches[(!l1).index()].push(Watcher { cref: c, blocker: l0 });
    }

    /// Adds a clause at the root level. Returns false if the formula became UNSAT.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let mut ls: Vec<Lit> = lits.to_vec();
        ls.sort();
        ls.dedup();
        let mut out = Vec::with_capacity(ls.len());
        for (i, l) in ls.iter().enumerate() {
            if i + 1 < ls.len() && ls[i + 1] == !*l {
                return true;
            }
            match self.lit_value(*l) {
                1 => return true,
                0 => {}
                _ => out.push(*l),
            }
        }
        match out.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(out[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                let c = self.alloc(&out, false, 0);
                self.clauses.push(c);
                self.attach(c);
                true
            }
        }
    }

    #[inline]
    fn enqueue(&mut self, l: Lit, reason: u32) {
        let v = l.var().index();
        self.assigns[v] = !l.is_neg() as u8;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.index()]);
            let mut i = 0;
            let mut j = 0;
            'next: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.lit_value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let c = w.cref as usize;
                if self.arena[c + 1] & DELETED != 0 {
                    continue;
                }
                if Lit(self.arena[c + HDR]) == false_lit {
                    self.arena.swap(c + HDR, c + HDR + 1);
                }
                let first = Lit(self.arena[c + HDR]);
                let nw = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                if first != w.blocker && self.lit_value(first) == 1 {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                let len = self.arena[c] as usize;
                for k in 2..len {
                    let lk = Lit(self.arena[c + HDR + k]);
                    if self.lit_value(lk) != 0 {
                        self.arena.swap(c + HDR + 1, c + HDR + k);
                        self.watches[(!lk).index()].push(nw);
                        continue 'next;
                    }
                }
                ws[j] = nw;
                j += 1;
                if self.lit_value(first) == 0 {
                    conflict = Some(w.cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[p.index()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var();
            self.assigns[v.index()] = UNDEF;
            self.reason[v.index()] = NO_REASON;
            self.polarity[v.index()] = !l.is_neg();
            self.heap.insert(v.0, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn bump_var(&mut self, v: Var) {
        let a = &mut self.activity[v.index()];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in &mut self.activity {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bump(v.0, &self.activity);
    }

    fn bump_clause(&mut self, c: u32) {
        let idx = c as usize + 2;
        let a = f32::from_bits(self.arena[idx]) + self.cla_inc;
        self.arena[idx] = a.to_bits();
        if a > 1e20 {
            for &l in &self.learnts {
                let i = l as usize + 2;
                self.arena[i] = (f32::from_bits(self.arena[i]) * 1e-20).to_bits();
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn compute_lbd(&mut self, lits: &[Lit]) -> u32 {
        self.lbd_counter += 1;
        let mut n = 0;
        for l in lits {
            let lv = self.level[l.var().index()] as usize;
            if lv < self.lbd_stamp.len() && self.lbd_stamp[lv] != self.lbd_counter {
                self.lbd_stamp[lv] = self.lbd_counter;
                n += 1;
            }
        }
        n
    }

    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut path = 0;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let dl = self.decision_level();
        loop {
            if self.arena[confl as usize + 1] & LEARNT != 0 {
                self.bump_clause(confl);
            }
            let len = self.clen(confl);
            let start = if p.is_some() { 1 } else { 0 };
            for k in start..len {
                let q = self.clit(confl, k);
                let v = q.var();
                if self.seen[v.index()] == 0 && self.level[v.index()] > 0 {
                    self.bump_var(v);
                    self.seen[v.index()] = 1;
                    if self.level[v.index()] >= dl {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().index()] != 0 {
                    break;
                }
            }
            let pl = self.trail[idx];
            p = Some(pl);
            confl = self.reason[pl.var().index()];
            self.seen[pl.var().index()] = 0;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = !p.unwrap();

        // Local minimization: drop literals implied by other literals of the clause.
        let mut keep = vec![learnt[0]];
        for &l in &learnt[1..] {
            let r = self.reason[l.var().index()];
            let redundant = r != NO_REASON && {
                let len = self.clen(r);
                (1..len).all(|k| {
                    let q = self.clit(r, k);
                    self.seen[q.var().index()] != 0 || self.level[q.var().index()] == 0
                })
            };
            if !redundant {
                keep.push(l);
            }
        }
        for l in &learnt {
            self.seen[l.var().index()] = 0;
        }
        let mut learnt = keep;

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut mi = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var().index()] > self.level[learnt[mi].var().index()] {
                    mi = k;
                }
            }
            learnt.swap(1, mi);
            self.level[learnt[1].var().index()]
        };
        (learnt, bt)
    }

    fn locked(&self, c: u32) -> bool {
        let l0 = self.clit(c, 0);
        let v = l0.var().index();
        self.reason[v] == c && self.lit_value(l0) == 1
    }

    fn reduce_db(&mut self) {
        let mut ls = std::mem::take(&mut self.learnts);
        ls.sort_by(|a, b| {
            let la = self.arena[*a as usize + 1] & (LEARNT - 1);
            let lb = self.arena[*b as usize + 1] & (LEARNT - 1);
            let aa = f32::from_bits(self.arena[*a as usize + 2]);
            let ab = f32::from_bits(self.arena[*b as usize + 2]);
            lb.cmp(&la).then(aa.partial_cmp(&ab).unwrap_or(std::cmp::Ordering::Equal))
        });
        let half = ls.len() / 2;
        let mut kept = Vec::with_capacity(ls.len());
        for (i, c) in ls.into_iter().enumerate() {
            let lbd = self.arena[c as usize + 1] & (LEARNT - 1);
            if i < half && lbd > 2 && self.clen(c) > 2 && !self.locked(c) {
                self.arena[c as usize + 1] |= DELETED;
                self.wasted += HDR + self.clen(c);
            } else {
                kept.push(c);
            }
        }
        self.learnts = kept;
    }

    /// Rebuilds the clause arena without deleted clauses; only at level 0.
    fn compact(&mut self) {
        debug_assert_eq!(self.decision_level(), 0);
        let mut arena = Vec::with_capacity(self.arena.len() - self.wasted);
        let move_clause = |c: u32, arena: &mut Vec<u32>, src: &[u32]| -> u32 {
            let s = c as usize;
            let len = src[s] as usize;
            let n = arena.len() as u32;
            arena.extend_from_slice(&src[s..s + HDR + len]);
            n
        };
        let clauses: Vec<u32> = self
            .clauses
            .iter()
            .map(|c| move_clause(*c, &mut arena, &self.arena))
            .collect();
        let learnts: Vec<u32> = self
            .learnts
            .iter()
            .map(|c| move_clause(*c, &mut arena, &self.arena))
            .collect();
        self.arena = arena;
        self.clauses = clauses;
        self.learnts = learnts;
        self.wasted = 0;
        for r in &mut self.reason {
            *r = NO_REASON;
        }
        for w in &mut self.watches {
            w.clear();
        }
        let all: Vec<u32> = self.clauses.iter().chain(&self.learnts).copied().collect();
        for c in all {
            self.attach(c);
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        loop {
            let v = self.heap.pop(&self.activity)?;
            if self.assigns[v as usize] == UNDEF {
                return Some(Var(v).lit(self.polarity[v as usize]));
            }
        }
    }

    pub fn solve(&mut self) -> SatResult {
        self.solve_with(&[])
    }

    /// Solves under the given assumption literals.
    pub fn solve_with(&mut self, assumptions: &[Lit]) -> SatResult {
        self.stats.solves += 1;
        if !self.ok {
            return SatResult::Unsat;
        }
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.ok = false;
            return SatResult::Unsat;
        }
        if self.max_learnts == 0.0 {
            self.max_learnts = (self.clauses.len() as f64 / 3.0).max(2000.0);
        }
        let start_conflicts = self.stats.conflicts;
        let mut restart = 0u64;
        loop {
            let limit = (luby(2.0, restart) * 100.0) as u64;
            restart += 1;
            match self.search(limit, assumptions, start_conflicts) {
                Some(r) => {
                    if r == SatResult::Sat {
                        self.model = self.assigns.iter().map(|a| *a == 1).collect();
                    }
                    self.cancel_until(0);
                    return r;
                }
                None => {
                    self.stats.restarts += 1;
                    self.cancel_until(0);
                    if self.wasted > self.arena.len() / 2 {
                        self.compact();
                    }
                }
            }
        }
    }

    fn search(&mut self, limit: u64, assumptions: &[Lit], start: u64) -> Option<SatResult> {
        let mut local = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                local += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(SatResult::Unsat);
                }
                let (learnt, bt) = self.analyze(confl);
                // Conflicts inside the assumption prefix are handled by the
                // assumption check on the next decision.
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let lbd = self.compute_lbd(&learnt);
                    let c = self.alloc(&learnt, true, lbd);
                    self.learnts.push(c);
                    self.attach(c);
                    self.bump_clause(c);
                    self.enqueue(learnt[0], c);
                }
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
                if let Some(b) = self.conflict_budget {
                    if self.stats.conflicts - start >= b {
                        return Some(SatResult::Unknown);
                    }
                }
            } else {
                if local >= limit {
                    return None;
                }
                if self.learnts.len() as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                    self.max_learnts *= 1.1;
                }
                let mut next = None;
                while (self.decision_level() as usize) < assumptions.len() {
                    let a = assumptions[self.decision_level() as usize];
                    match self.lit_value(a) {
                        1 => self.trail_lim.push(self.trail.len()),
                        0 => return Some(SatResult::Unsat),
                        _ => {
                            next = Some(a);
                            break;
                        }
                    }
                }
                let lit = match next {
                    Some(a) => a,
                    None => {
                        self.stats.decisions += 1;
                        match self.pick_branch() {
                            Some(l) => l,
                            None => return Some(SatResult::Sat),
                        }
                    }
                };
                self.trail_lim.push(self.trail.len());
                self.enqueue(lit, NO_REASON);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(nvars: usize, clauses: &[Vec<Lit>]) -> bool {
        (0u32..1 << nvars).any(|m| {
            clauses
                .iter()
                .all(|c| c.iter().any(|l| ((m >> l.var().0) & 1 == 1) != l.is_neg()))
        })
    }

    #[test]
    fn tiny() {
        let mut s = Solver::new();
        let a = s.new_var();
        let b = s.new_var();
        s.add_clause(&[a.pos(), b.pos()]);
        s.add_clause(&[a.neg(), b.pos()]);
        assert_eq!(s.solve(), SatResult::Sat);
        assert!(s.model_value(b.pos()));
        assert_eq!(s.solve_with(&[b.neg()]), SatResult::Unsat);
        assert_eq!(s.solve(), SatResult::Sat);
        s.add_clause(&[b.neg()]);
        assert_eq!(s.solve(), SatResult::Unsat);
    }

    #[test]
    fn pigeonhole_unsat() {
        // 5 pigeons, 4 holes.
        let mut s = Solver::new();
        let p: Vec<Vec<Var>> = (0..5).map(|_| (0..4).map(|_| s.new_var()).collect()).collect();
        for row in &p {
            s.add_clause(&row.iter().map(|v| v.pos()).collect::<Vec<_>>());
        }
        for h in 0..4 {
            for i in 0..5 {
                for j in i + 1..5 {
                    s.add_clause(&[p[i][h].neg(), p[j][h].neg()]);
                }
            }
        }
        assert_eq!(s.solve(), SatResult::Unsat);
    }

    #[test]
    fn random_3sat_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(3..12);
            let m = rng.gen_range(1..(5 * n));
            let clauses: Vec<Vec<Lit>> = (0..m)
                .map(|_| {
                    (0..3)
                        .map(|_| Var(rng.gen_range(0..n) as u32).lit(rng.gen()))
                        .collect()
                })
                .collect();
            let mut s = Solver::new();
            for _ in 0..n {
                s.new_var();
            }
            for c in &clauses {
                s.add_clause(c);
            }
            let r = s.solve();
            assert_eq!(r == SatResult::Sat, brute(n, &clauses));
            if r == SatResult::Sat {
                for c in &clauses {
                    assert!(c.iter().any(|l| s.model_value(*l)));
                }
            }
            let a = Var(rng.gen_range(0..n) as u32).lit(rng.gen());
            let mut with = clauses.clone();
            with.push(vec![a]);
            let r2 = s.solve_with(&[a]);
            assert_eq!(r2 == SatResult::Sat, brute(n, &with));
        }
    }
}
