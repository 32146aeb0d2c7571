//! Regions: state subsets with a consistent event signature.
//!
//! A region `R` of a system assigns every state a membership bit and every
//! event a sign such that each edge `s -e-> t` satisfies
//! `R(t) = R(s) + sig(e)`. The signature is a function of the membership
//! and is always derived, never supplied by callers.

mod solver;

use std::cmp::Ordering;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::ts::{EventId, StateId, System, TransitionSystem};

pub use solver::{RegionSolver, Timeout};

/// Default state-count cap for brute-force enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 22;

/// Signature value of an event in a region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    Exit = -1,
    Obey = 0,
    Enter = 1,
}

impl Sign {
    pub fn value(self) -> i32 {
        self as i32
    }

    pub fn from_value(v: i32) -> Option<Sign> {
        match v {
            -1 => Some(Sign::Exit),
            0 => Some(Sign::Obey),
            1 => Some(Sign::Enter),
            _ => None,
        }
    }

    pub fn negate(self) -> Sign {
        match self {
            Sign::Exit => Sign::Enter,
            Sign::Obey => Sign::Obey,
            Sign::Enter => Sign::Exit,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Exit => "-1",
            Sign::Obey => "0",
            Sign::Enter => "+1",
        })
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RegionError {
    #[error("state ordinal {0} is out of range")]
    StateOutOfRange(u32),
    #[error("event ordinal {0} is out of range")]
    EventOutOfRange(u32),
    #[error("state `{0}` is fixed to conflicting memberships")]
    ConflictingState(String),
    #[error("event `{0}` is fixed to conflicting signatures")]
    ConflictingEvent(String),
    #[error("enumeration refused: {states} states exceed the cap of {cap}")]
    CapExceeded { states: usize, cap: usize },
    #[error("signature aggregation needs a linear transition system")]
    NotLinear,
    #[error("indices ({i}, {j}) are out of range for a chain of {len} edges")]
    IndexOutOfRange { i: usize, j: usize, len: usize },
}

/// A valid region of some system.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    members: FixedBitSet,
    signature: Vec<Sign>,
}

impl Region {
    pub fn members(&self) -> &FixedBitSet {
        &self.members
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.members.contains(s.index())
    }

    /// Membership as 0/1.
    pub fn value(&self, s: StateId) -> i32 {
        self.contains(s) as i32
    }

    pub fn sign(&self, e: EventId) -> Sign {
        self.signature[e.index()]
    }

    pub fn signature(&self) -> &[Sign] {
        &self.signature
    }

    pub fn member_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.members.ones().map(|i| StateId(i as u32))
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    /// Events with signature −1.
    pub fn exits(&self) -> impl Iterator<Item = EventId> + '_ {
        self.events_with(Sign::Exit)
    }

    /// Events with signature +1.
    pub fn enters(&self) -> impl Iterator<Item = EventId> + '_ {
        self.events_with(Sign::Enter)
    }

    /// Events with signature 0.
    pub fn obeys(&self) -> impl Iterator<Item = EventId> + '_ {
        self.events_with(Sign::Obey)
    }

    fn events_with(&self, sign: Sign) -> impl Iterator<Item = EventId> + '_ {
        self.signature
            .iter()
            .enumerate()
            .filter(move |(_, &s)| s == sign)
            .map(|(i, _)| EventId(i as u32))
    }

    /// Whether the region witnesses that `e` is inhibited at `s`.
    pub fn inhibits(&self, e: EventId, s: StateId) -> bool {
        match self.sign(e) {
            Sign::Exit => !self.contains(s),
            Sign::Enter => self.contains(s),
            Sign::Obey => false,
        }
    }

    /// Whether the region distinguishes `s` from `t`.
    pub fn separates(&self, s: StateId, t: StateId) -> bool {
        self.contains(s) != self.contains(t)
    }

    /// The complementary region: flipped membership, negated signature.
    pub fn complement(&self) -> Region {
        let mut members = self.members.clone();
        members.toggle_range(..);
        Region {
            members,
            signature: self.signature.iter().map(|s| s.negate()).collect(),
        }
    }

    /// Canonical total order: lexicographic on the membership bit-vector
    /// read from state 0 upwards, absent before present.
    pub fn canonical_cmp(&self, other: &Region) -> Ordering {
        let mine = self.members.difference(&other.members).next();
        let theirs = other.members.difference(&self.members).next();
        match (mine, theirs) {
            (None, None) => Ordering::Equal,
            (Some(_), None) => Ordering::Greater,
            (None, Some(_)) => Ordering::Less,
            (Some(a), Some(b)) => b.cmp(&a),
        }
    }
}

impl Ord for Region {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_cmp(other)
    }
}

impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Signature of `members` if it is a region of `sys`.
///
/// Events that label no edge obey by convention.
pub fn check_region(sys: &System, members: &FixedBitSet) -> Option<Region> {
    let mut members = members.clone();
    members.grow(sys.state_count());
    if members.len() != sys.state_count() {
        return None;
    }
    let mut sig: Vec<Option<Sign>> = vec![None; sys.event_count()];
    for edge in sys.edges() {
        let delta = members.contains(edge.target.index()) as i32
            - members.contains(edge.source.index()) as i32;
        let sign = Sign::from_value(delta).unwrap();
        match sig[edge.event.index()] {
            None => sig[edge.event.index()] = Some(sign),
            Some(prev) if prev == sign => {}
            Some(_) => return None,
        }
    }
    Some(Region {
        members,
        signature: sig.into_iter().map(|s| s.unwrap_or(Sign::Obey)).collect(),
    })
}

/// Convenience wrapper building the membership from state ids.
pub fn region_from_states(
    sys: &System,
    states: impl IntoIterator<Item = StateId>,
) -> Option<Region> {
    let mut members = FixedBitSet::with_capacity(sys.state_count());
    for s in states {
        if s.index() >= sys.state_count() {
            return None;
        }
        members.insert(s.index());
    }
    check_region(sys, &members)
}

/// Like [`region_from_states`] but by state name; unknown names yield `None`.
pub fn region_from_names<S: AsRef<str>>(sys: &System, names: &[S]) -> Option<Region> {
    let ids: Option<Vec<StateId>> = names.iter().map(|n| sys.state(n.as_ref())).collect();
    region_from_states(sys, ids?)
}

/// The complement of a region.
pub fn complement(region: &Region) -> Region {
    region.complement()
}

/// All regions of `sys` by brute force over every membership subset,
/// in canonical order. Refuses systems with more than `cap` states.
pub fn enumerate_regions(sys: &System, cap: usize) -> Result<Vec<Region>, RegionError> {
    let n = sys.state_count();
    if n > cap || n >= 63 {
        return Err(RegionError::CapExceeded { states: n, cap });
    }
    let edges: Vec<(usize, usize, usize)> = sys
        .edges()
        .iter()
        .map(|e| (e.source.index(), e.event.index(), e.target.index()))
        .collect();
    let mut sig = vec![2i8; sys.event_count()];
    let mut found = Vec::new();
    for mask in 0u64..(1u64 << n) {
        sig.iter_mut().for_each(|v| *v = 2);
        let ok = edges.iter().all(|&(s, e, t)| {
            let d = ((mask >> t) & 1) as i8 - ((mask >> s) & 1) as i8;
            if sig[e] == 2 {
                sig[e] = d;
                true
            } else {
                sig[e] == d
            }
        });
        if ok {
            let mut members = FixedBitSet::with_capacity(n);
            for i in 0..n {
                if (mask >> i) & 1 == 1 {
                    members.insert(i);
                }
            }
            found.push(Region {
                members,
                signature: sig
                    .iter()
                    .map(|&v| {
                        if v == 2 {
                            Sign::Obey
                        } else {
                            Sign::from_value(v as i32).unwrap()
                        }
                    })
                    .collect(),
            });
        }
    }
    found.sort();
    Ok(found)
}

/// A partial assignment of memberships and signatures that regions must
/// agree with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionConstraint {
    membership: Vec<Option<bool>>,
    signature: Vec<Option<Sign>>,
    state_names: Vec<String>,
    event_names: Vec<String>,
}

impl RegionConstraint {
    /// The empty constraint over `sys`.
    pub fn new(sys: &System) -> Self {
        RegionConstraint {
            membership: vec![None; sys.state_count()],
            signature: vec![None; sys.event_count()],
            state_names: sys
                .states()
                .map(|s| sys.state_name(s).to_string())
                .collect(),
            event_names: sys
                .events()
                .map(|e| sys.event_name(e).to_string())
                .collect(),
        }
    }

    /// `sig(e) = −1` and `R(s) = 0`: the canonical inhibition polarity.
    pub fn inhibit(sys: &System, e: EventId, s: StateId) -> Result<Self, RegionError> {
        let mut c = RegionConstraint::new(sys);
        c.fix_event(e, Sign::Exit)?;
        c.fix_state(s, false)?;
        Ok(c)
    }

    /// `R(s) = 1` and `R(t) = 0`.
    pub fn separate(sys: &System, s: StateId, t: StateId) -> Result<Self, RegionError> {
        let mut c = RegionConstraint::new(sys);
        c.fix_state(s, true)?;
        c.fix_state(t, false)?;
        Ok(c)
    }

    pub fn fix_state(&mut self, s: StateId, member: bool) -> Result<&mut Self, RegionError> {
        let slot = self
            .membership
            .get_mut(s.index())
            .ok_or(RegionError::StateOutOfRange(s.0))?;
        match *slot {
            Some(v) if v != member => Err(RegionError::ConflictingState(
                self.state_names[s.index()].clone(),
            )),
            _ => {
                *slot = Some(member);
                Ok(self)
            }
        }
    }

    pub fn fix_event(&mut self, e: EventId, sign: Sign) -> Result<&mut Self, RegionError> {
        let slot = self
            .signature
            .get_mut(e.index())
            .ok_or(RegionError::EventOutOfRange(e.0))?;
        match *slot {
            Some(v) if v != sign => Err(RegionError::ConflictingEvent(
                self.event_names[e.index()].clone(),
            )),
            _ => {
                *slot = Some(sign);
                Ok(self)
            }
        }
    }

    pub fn state(&self, s: StateId) -> Option<bool> {
        self.membership[s.index()]
    }

    pub fn event(&self, e: EventId) -> Option<Sign> {
        self.signature[e.index()]
    }

    pub fn state_count(&self) -> usize {
        self.membership.len()
    }

    pub fn event_count(&self) -> usize {
        self.signature.len()
    }

    /// Whether `region` agrees with every fixed value.
    pub fn admits(&self, region: &Region) -> bool {
        self.membership
            .iter()
            .enumerate()
            .all(|(i, v)| v.is_none_or(|v| region.members.contains(i) == v))
            && self
                .signature
                .iter()
                .enumerate()
                .all(|(i, v)| v.is_none_or(|v| region.signature[i] == v))
    }
}

/// Some region satisfying `constraint`, if one exists.
pub fn solve_region(sys: &System, constraint: &RegionConstraint) -> Option<Region> {
    RegionSolver::new(sys)
        .solve(constraint)
        .expect("no deadline was set")
}

/// Up to `limit` regions satisfying `constraint`, in canonical order.
pub fn solve_all_regions(sys: &System, constraint: &RegionConstraint, limit: usize) -> Vec<Region> {
    RegionSolver::new(sys)
        .solve_all(constraint, limit)
        .expect("no deadline was set")
}

/// `R(s_j) − R(s_i)` on a linear system, computed as the sum of the
/// signatures of `e_{i+1} … e_j`.
pub fn aggregate_signature(
    region: &Region,
    ts: &TransitionSystem,
    i: usize,
    j: usize,
) -> Result<i32, RegionError> {
    let chain = ts.linear_chain().map_err(|_| RegionError::NotLinear)?;
    let len = chain.events.len();
    if i > j || j > len {
        return Err(RegionError::IndexOutOfRange { i, j, len });
    }
    let sum: i32 = chain.events[i..j]
        .iter()
        .map(|&e| region.sign(e).value())
        .sum();
    debug_assert_eq!(
        sum,
        region.value(chain.states[j]) - region.value(chain.states[i])
    );
    Ok(sum)
}

/// Builds a region from a full membership assignment produced internally.
pub(crate) fn region_unchecked(sys: &System, members: FixedBitSet) -> Region {
    check_region(sys, &members).expect("solver produced an invalid region")
}
