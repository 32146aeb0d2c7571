//! Constraint-propagation search for regions.
//!
//! Variables are the state memberships (domain `{0, 1}`) and event
//! signatures (domain `{−1, 0, +1}`); every edge `s -e-> t` is the ternary
//! constraint `t = s + e`. Domains are bit masks, kept arc consistent by an
//! edge worklist, and restored from a trail on backtracking.
//!
//! Search branches on the unassigned event with the most occurrences (value
//! order −1, 0, +1), then on the lowest unassigned state (0, then 1). At
//! every node the unassigned variables are split into independent
//! components which are solved separately; an event labelling a single edge
//! whose domain still admits every membership combination of its endpoints
//! does not link them and is derived once they are fixed.
//!
//! Backtracking is conflict directed: every removed domain value remembers
//! the decision levels that caused its removal, a failed subtree reports the
//! levels its failure depends on, and a decision not among them is not
//! retried with other values — the search returns straight to the deepest
//! responsible decision. Only subtrees without solutions are skipped, so
//! the solutions and their order are those of plain backtracking.

use std::time::Instant;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use super::{region_unchecked, Region, RegionConstraint, Sign};
use crate::ts::System;

/// The search ran past its deadline.
#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
#[error("region search exceeded its deadline")]
pub struct Timeout;

// Domain encodings. States: bit 0 = "0", bit 1 = "1".
// Events: bit 0 = −1, bit 1 = 0, bit 2 = +1.
const STATE_FULL: u8 = 0b011;
const EVENT_FULL: u8 = 0b111;

/// Supported sub-domains for `(ds, de, dt)`, indexed `ds | de << 2 | dt << 5`.
const SUPPORT: [(u8, u8, u8); 128] = build_support();

const fn build_support() -> [(u8, u8, u8); 128] {
    let mut table = [(0u8, 0u8, 0u8); 128];
    let mut idx = 0;
    while idx < 128 {
        let ds = (idx & 0b11) as u8;
        let de = ((idx >> 2) & 0b111) as u8;
        let dt = ((idx >> 5) & 0b11) as u8;
        let (mut ns, mut ne, mut nt) = (0u8, 0u8, 0u8);
        let mut s = 0;
        while s < 2 {
            let mut e = 0;
            while e < 3 {
                // e encodes the value e − 1
                let t = s + e - 1;
                if t >= 0
                    && t <= 1
                    && ds & (1 << s) != 0
                    && de & (1 << e) != 0
                    && dt & (1 << t) != 0
                {
                    ns |= 1 << s;
                    ne |= 1 << e;
                    nt |= 1 << t;
                }
                e += 1;
            }
            s += 1;
        }
        table[idx] = (ns, ne, nt);
        idx += 1;
    }
    table
}

fn sign_bit(sign: Sign) -> u8 {
    1 << (sign.value() + 1)
}

/// Reusable region search over one system.
///
/// A solver owns mutable search state and serves one query at a time;
/// independent solvers over the same system may run concurrently.
pub struct RegionSolver<'a> {
    sys: &'a System,
    n_states: usize,
    dom: Vec<u8>,
    trail: Vec<(u32, u8)>,
    queue: Vec<u32>,
    queued: Vec<bool>,
    occurrences: Vec<u32>,
    // Scratch for component decomposition.
    local: Vec<u32>,
    /// Decision levels behind the removal of value `bit` from variable
    /// `var`, at index `3 * var + bit`; meaningful while the value is absent.
    reason: Vec<FixedBitSet>,
    /// Levels behind the most recent failure.
    conflict: FixedBitSet,
    level: usize,
    deadline: Option<Instant>,
    timed_out: bool,
    nodes: u64,
}

impl<'a> RegionSolver<'a> {
    pub fn new(sys: &'a System) -> Self {
        let n_states = sys.state_count();
        let n_vars = n_states + sys.event_count();
        RegionSolver {
            sys,
            n_states,
            dom: vec![0; n_vars],
            trail: Vec::new(),
            queue: Vec::new(),
            queued: vec![false; sys.edges().len()],
            occurrences: sys.events().map(|e| sys.occurrences(e) as u32).collect(),
            local: vec![u32::MAX; n_vars],
            reason: vec![FixedBitSet::new(); 3 * n_vars],
            conflict: FixedBitSet::new(),
            level: 0,
            deadline: None,
            timed_out: false,
            nodes: 0,
        }
    }

    pub fn system(&self) -> &'a System {
        self.sys
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    /// Search nodes visited over the solver's lifetime.
    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    /// Some region satisfying `constraint`.
    pub fn solve(&mut self, constraint: &RegionConstraint) -> Result<Option<Region>, Timeout> {
        Ok(self.solve_all_unsorted(constraint, 1)?.into_iter().next())
    }

    /// Up to `limit` regions satisfying `constraint`, in canonical order.
    pub fn solve_all(
        &mut self,
        constraint: &RegionConstraint,
        limit: usize,
    ) -> Result<Vec<Region>, Timeout> {
        let mut regions = self.solve_all_unsorted(constraint, limit)?;
        regions.sort();
        Ok(regions)
    }

    fn solve_all_unsorted(
        &mut self,
        constraint: &RegionConstraint,
        limit: usize,
    ) -> Result<Vec<Region>, Timeout> {
        assert_eq!(
            constraint.state_count(),
            self.n_states,
            "constraint built for another system"
        );
        assert_eq!(
            constraint.event_count(),
            self.sys.event_count(),
            "constraint built for another system"
        );
        if limit == 0 {
            return Ok(Vec::new());
        }
        self.timed_out = self.deadline.is_some_and(|d| Instant::now() >= d);
        if self.timed_out {
            return Err(Timeout);
        }
        if !self.init(constraint) {
            return Ok(Vec::new());
        }
        let scope: Vec<u32> = (0..self.dom.len() as u32).collect();
        let members = self.enumerate(&scope, limit);
        if self.timed_out {
            return Err(Timeout);
        }
        Ok(members
            .into_iter()
            .map(|m| region_unchecked(self.sys, m))
            .collect())
    }

    /// Resets domains to the constraint and propagates; false on conflict.
    fn init(&mut self, constraint: &RegionConstraint) -> bool {
        self.trail.clear();
        self.level = 0;
        self.reason.iter_mut().for_each(FixedBitSet::clear);
        for (i, d) in self.dom.iter_mut().enumerate() {
            *d = if i < self.n_states {
                STATE_FULL
            } else {
                EVENT_FULL
            };
        }
        for s in self.sys.states() {
            if let Some(v) = constraint.state(s) {
                self.dom[s.index()] = 1 << v as u8;
            }
        }
        for e in self.sys.events() {
            let var = self.n_states + e.index();
            if let Some(sign) = constraint.event(e) {
                self.dom[var] = sign_bit(sign);
            }
            // Events labelling no edge obey by convention.
            if self.occurrences[e.index()] == 0 {
                self.dom[var] &= sign_bit(Sign::Obey);
                if self.dom[var] == 0 {
                    return false;
                }
            }
        }
        self.queue.clear();
        self.queued.iter_mut().for_each(|q| *q = false);
        for i in 0..self.sys.edges().len() as u32 {
            self.queued[i as usize] = true;
            self.queue.push(i);
        }
        self.propagate()
    }

    /// Restricts `var` to `dom` as the decision of the current level.
    fn assign(&mut self, var: u32, dom: u8) -> bool {
        let old = self.dom[var as usize];
        if old == dom {
            return true;
        }
        for bit in 0..3 {
            if old & !dom & (1 << bit) != 0 {
                let r = &mut self.reason[3 * var as usize + bit];
                r.clear();
                r.grow(self.level + 1);
                r.insert(self.level);
            }
        }
        self.trail.push((var, old));
        self.dom[var as usize] = dom;
        self.enqueue_var(var);
        self.propagate()
    }

    /// Adds the reasons of all values missing from `var` to `into`.
    fn explain_into(
        reason: &[FixedBitSet],
        dom: &[u8],
        full: u8,
        var: usize,
        into: &mut FixedBitSet,
    ) {
        let missing = full & !dom[var];
        for bit in 0..3 {
            if missing & (1 << bit) != 0 {
                into.union_with(&reason[3 * var + bit]);
            }
        }
    }

    fn full_domain(&self, var: usize) -> u8 {
        if var < self.n_states {
            STATE_FULL
        } else {
            EVENT_FULL
        }
    }

    fn enqueue_var(&mut self, var: u32) {
        let sys = self.sys;
        let v = var as usize;
        let push = |queue: &mut Vec<u32>, queued: &mut Vec<bool>, i: u32| {
            if !queued[i as usize] {
                queued[i as usize] = true;
                queue.push(i);
            }
        };
        if v < self.n_states {
            let s = crate::ts::StateId(var);
            for &i in sys.out_edges(s).iter().chain(sys.in_edges(s)) {
                push(&mut self.queue, &mut self.queued, i);
            }
        } else {
            let e = crate::ts::EventId((v - self.n_states) as u32);
            for &i in sys.event_edges(e) {
                push(&mut self.queue, &mut self.queued, i);
            }
        }
    }

    /// Narrows `var` to `new` because of the current domains of `others`.
    fn set(&mut self, var: usize, new: u8, others: [usize; 2]) {
        let old = self.dom[var];
        if old != new {
            let mut why = FixedBitSet::new();
            for o in others {
                let full = self.full_domain(o);
                Self::explain_into(&self.reason, &self.dom, full, o, &mut why);
            }
            for bit in 0..3 {
                if old & !new & (1 << bit) != 0 {
                    self.reason[3 * var + bit].clone_from(&why);
                }
            }
            self.trail.push((var as u32, old));
            self.dom[var] = new;
            self.enqueue_var(var as u32);
        }
    }

    fn propagate(&mut self) -> bool {
        let edges = self.sys.edges();
        while let Some(i) = self.queue.pop() {
            self.queued[i as usize] = false;
            let edge = edges[i as usize];
            let (sv, ev, tv) = (
                edge.source.index(),
                self.n_states + edge.event.index(),
                edge.target.index(),
            );
            let (ds, de, dt) = (self.dom[sv], self.dom[ev], self.dom[tv]);
            let (ns, ne, nt) = SUPPORT[(ds | de << 2 | dt << 5) as usize];
            if ns == 0 {
                for q in self.queue.drain(..) {
                    self.queued[q as usize] = false;
                }
                let mut conflict = FixedBitSet::new();
                for v in [sv, ev, tv] {
                    let full = self.full_domain(v);
                    Self::explain_into(&self.reason, &self.dom, full, v, &mut conflict);
                }
                self.conflict = conflict;
                return false;
            }
            self.set(sv, ns, [ev, tv]);
            self.set(ev, ne, [sv, tv]);
            self.set(tv, nt, [sv, ev]);
        }
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (var, old) = self.trail.pop().unwrap();
            self.dom[var as usize] = old;
        }
    }

    fn is_fixed(&self, var: u32) -> bool {
        self.dom[var as usize].count_ones() == 1
    }

    /// An unfixed event on a single edge whose domain covers every
    /// combination of its endpoints' domains.
    fn is_derived(&self, var: u32) -> bool {
        let e = crate::ts::EventId(var - self.n_states as u32);
        let edges = self.sys.event_edges(e);
        if edges.len() != 1 {
            return false;
        }
        let edge = self.sys.edges()[edges[0] as usize];
        let (ds, de, dt) = (
            self.dom[edge.source.index()],
            self.dom[var as usize],
            self.dom[edge.target.index()],
        );
        for s in 0..2i32 {
            for t in 0..2i32 {
                if ds & (1 << s) != 0 && dt & (1 << t) != 0 && de & (1 << (t - s + 1)) == 0 {
                    return false;
                }
            }
        }
        true
    }

    fn out_of_time(&mut self) -> bool {
        if self.timed_out {
            return true;
        }
        self.nodes += 1;
        if self.nodes.is_multiple_of(256) {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.timed_out = true;
                }
            }
        }
        self.timed_out
    }

    /// Membership sets (restricted to the states of `scope`) of up to
    /// `limit` solutions of the current sub-problem over `scope`.
    /// Leaves the domains as it found them.
    fn enumerate(&mut self, scope: &[u32], limit: usize) -> Vec<FixedBitSet> {
        if self.out_of_time() {
            self.blame_all();
            return Vec::new();
        }
        let n_states = self.n_states as u32;
        let mut base = FixedBitSet::with_capacity(self.n_states);
        let mut open = Vec::new();
        for &v in scope {
            if v < n_states {
                if self.is_fixed(v) {
                    if self.dom[v as usize] == 0b10 {
                        base.insert(v as usize);
                    }
                } else {
                    open.push(v);
                }
            } else if !self.is_fixed(v) && !self.is_derived(v) {
                open.push(v);
            }
        }
        if open.is_empty() {
            return vec![base];
        }
        let components = self.components(&open);
        if components.len() == 1 {
            let mut found = self.branch(&open, limit);
            for m in &mut found {
                m.union_with(&base);
            }
            return found;
        }
        let mut acc = vec![base];
        for comp in &components {
            let part = self.branch(comp, limit);
            if part.is_empty() {
                return Vec::new();
            }
            let mut next = Vec::with_capacity(limit.min(acc.len() * part.len()));
            'outer: for a in &acc {
                for b in &part {
                    let mut m = a.clone();
                    m.union_with(b);
                    next.push(m);
                    if next.len() >= limit {
                        break 'outer;
                    }
                }
            }
            acc = next;
        }
        acc
    }

    /// Branches on one variable of a connected set of open variables.
    fn branch(&mut self, comp: &[u32], limit: usize) -> Vec<FixedBitSet> {
        let n_states = self.n_states as u32;
        let var = comp
            .iter()
            .copied()
            .filter(|&v| v >= n_states)
            .max_by_key(|&v| {
                (
                    self.occurrences[(v - n_states) as usize],
                    std::cmp::Reverse(v),
                )
            })
            .unwrap_or_else(|| comp.iter().copied().min().unwrap());
        let dom = self.dom[var as usize];
        self.level += 1;
        let level = self.level;
        // Levels responsible for every value of `var` failing.
        let mut blame = FixedBitSet::with_capacity(level + 1);
        let full = self.full_domain(var as usize);
        Self::explain_into(&self.reason, &self.dom, full, var as usize, &mut blame);
        let mut found = Vec::new();
        for bit in 0..3 {
            let value = 1u8 << bit;
            if dom & value == 0 {
                continue;
            }
            let mark = self.trail.len();
            let before = found.len();
            if self.assign(var, value) {
                let sub = self.enumerate(comp, limit - found.len());
                found.extend(sub);
            }
            self.undo_to(mark);
            if found.len() >= limit || self.timed_out {
                break;
            }
            if found.len() == before {
                if found.is_empty() && !self.conflict.contains(level) {
                    // The failure does not depend on this decision, so no
                    // other value can avoid it: jump back past this level.
                    self.level -= 1;
                    return found;
                }
                blame.union_with(&self.conflict);
            }
        }
        if found.is_empty() && !self.timed_out {
            blame.set(level, false);
            self.conflict = blame;
        }
        self.level -= 1;
        found
    }

    /// Marks every open decision as responsible for the current failure,
    /// which disables backjumping past it (used when the search is cut off).
    fn blame_all(&mut self) {
        self.conflict = FixedBitSet::with_capacity(self.level + 1);
        self.conflict.insert_range(..);
    }

    /// Connected components of `open` under the edge constraints.
    fn components(&mut self, open: &[u32]) -> Vec<Vec<u32>> {
        for (i, &v) in open.iter().enumerate() {
            self.local[v as usize] = i as u32;
        }
        let mut parent: Vec<u32> = (0..open.len() as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        }
        let sys = self.sys;
        let n_states = self.n_states;
        let edges = sys.edges();
        let dom = &self.dom;
        let link = |parent: &mut Vec<u32>, local: &[u32], edge_idx: u32| {
            let edge = edges[edge_idx as usize];
            let ev = n_states + edge.event.index();
            if local[ev] == u32::MAX && dom[ev].count_ones() > 1 {
                // Derived event: the edge holds for any endpoint values.
                return;
            }
            let mut first = u32::MAX;
            for var in [edge.source.index(), ev, edge.target.index()] {
                let l = local[var];
                if l == u32::MAX {
                    continue;
                }
                if first == u32::MAX {
                    first = l;
                } else {
                    let (a, b) = (find(parent, first), find(parent, l));
                    if a != b {
                        parent[a.max(b) as usize] = a.min(b);
                    }
                }
            }
        };
        for &v in open {
            if (v as usize) < n_states {
                let s = crate::ts::StateId(v);
                for &i in sys.out_edges(s) {
                    link(&mut parent, &self.local, i);
                }
            } else {
                let e = crate::ts::EventId(v - n_states as u32);
                for &i in sys.event_edges(e) {
                    link(&mut parent, &self.local, i);
                }
            }
        }
        let mut index_of_root = vec![u32::MAX; open.len()];
        let mut comps: Vec<Vec<u32>> = Vec::new();
        for (i, &v) in open.iter().enumerate() {
            let root = find(&mut parent, i as u32) as usize;
            if index_of_root[root] == u32::MAX {
                index_of_root[root] = comps.len() as u32;
                comps.push(Vec::new());
            }
            comps[index_of_root[root] as usize].push(v);
        }
        for &v in open {
            self.local[v as usize] = u32::MAX;
        }
        comps
    }
}
