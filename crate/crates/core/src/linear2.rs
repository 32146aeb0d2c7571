//! Polynomial SSP machinery for linear 2-fold transition systems.
//!
//! For a chain `s_0 -e_1-> s_1 … -e_n-> s_n` in which every event labels at
//! most two edges, the SSP fails exactly when some segment `s_i … s_j`
//! contains every one of its events exactly twice (an *exact 2-fold
//! subsequence*): the signature sum over such a segment is even, so
//! `R(s_j) − R(s_i)` must be 0. Otherwise [`separator`] finds, for any two
//! states, a separating region with at most two non-obeying events.
//!
//! Edges are indexed from 0: edge `k` is `s_k -e_{k+1}-> s_{k+1}`.

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::regions::{check_region, Region};
use crate::ts::{EventId, StateId, TransitionSystem};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Linear2Error {
    #[error("input is not linear")]
    NotLinear,
    #[error("input is {0}-fold; at most 2-fold is supported")]
    NotTwoFold(u32),
    #[error("state indices ({i}, {j}) are invalid for a chain with {n} edges")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
}

/// For every edge, the index of the other edge with the same event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecondOccurrenceIndex {
    partner: Vec<Option<usize>>,
    events: Vec<EventId>,
    states: Vec<StateId>,
}

impl SecondOccurrenceIndex {
    /// Builds the table by sorting `(event, position)` pairs.
    pub fn new(ts: &TransitionSystem) -> Result<Self, Linear2Error> {
        let chain = ts.linear_chain().map_err(|_| Linear2Error::NotLinear)?;
        let k = ts.manifoldness();
        if k > 2 {
            return Err(Linear2Error::NotTwoFold(k));
        }
        let mut order: Vec<(EventId, usize)> = chain
            .events
            .iter()
            .enumerate()
            .map(|(pos, &e)| (e, pos))
            .collect();
        order.sort_unstable();
        let mut partner = vec![None; chain.events.len()];
        for w in order.windows(2) {
            if w[0].0 == w[1].0 {
                partner[w[0].1] = Some(w[1].1);
                partner[w[1].1] = Some(w[0].1);
            }
        }
        Ok(SecondOccurrenceIndex {
            partner,
            events: chain.events,
            states: chain.states,
        })
    }

    /// The other occurrence of the event on edge `k`, or −1 if unique.
    pub fn get(&self, k: usize) -> i64 {
        self.partner[k].map_or(-1, |p| p as i64)
    }

    pub fn partner(&self, k: usize) -> Option<usize> {
        self.partner[k]
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    /// Event of edge `k` (that is, `e_{k+1}`).
    pub fn event(&self, k: usize) -> EventId {
        self.events[k]
    }

    /// State `s_i` of the chain.
    pub fn state(&self, i: usize) -> StateId {
        self.states[i]
    }
}

/// Exit/enter events (at most one each) whose signature — listed events
/// ±1, all others 0 — defines a region; both empty means failure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SeparatorResult {
    pub exit: Option<EventId>,
    pub enter: Option<EventId>,
}

impl SeparatorResult {
    pub fn is_empty(&self) -> bool {
        self.exit.is_none() && self.enter.is_none()
    }

    /// The region induced by the signature, if it is one.
    pub fn region(&self, ts: &TransitionSystem) -> Option<Region> {
        if self.is_empty() {
            return None;
        }
        let chain = ts.linear_chain().ok()?;
        let mut prefix = vec![0i32; chain.states.len()];
        for (k, &e) in chain.events.iter().enumerate() {
            let d = if Some(e) == self.exit {
                -1
            } else if Some(e) == self.enter {
                1
            } else {
                0
            };
            prefix[k + 1] = prefix[k] + d;
        }
        let start = -prefix.iter().copied().min().unwrap_or(0);
        let mut members = FixedBitSet::with_capacity(ts.state_count());
        for (pos, &s) in chain.states.iter().enumerate() {
            match start + prefix[pos] {
                0 => {}
                1 => members.insert(s.index()),
                _ => return None,
            }
        }
        check_region(ts, &members)
    }
}

/// Some exact 2-fold subsequence `(i, j)`, smallest `i` then smallest `j`.
pub fn find_exact_2fold_subsequence(
    ts: &TransitionSystem,
) -> Result<Option<(usize, usize)>, Linear2Error> {
    let index = SecondOccurrenceIndex::new(ts)?;
    Ok(exact_2fold_subsequence(&index, ts.event_count()))
}

fn exact_2fold_subsequence(index: &SecondOccurrenceIndex, events: usize) -> Option<(usize, usize)> {
    let n = index.len();
    let mut count = vec![0u8; events];
    for i in 0..n {
        // Events occurring exactly once inside the window s_i … s_j.
        let mut single = 0usize;
        for j in i + 1..=n {
            let e = index.event(j - 1).index();
            count[e] += 1;
            match count[e] {
                1 => single += 1,
                _ => single -= 1,
            }
            if single == 0 {
                for k in i..j {
                    count[index.event(k).index()] = 0;
                }
                return Some((i, j));
            }
        }
        for k in i..n {
            count[index.event(k).index()] = 0;
        }
    }
    None
}

/// A separating region for `s_i`, `s_j` with at most two non-obeying
/// events, or the empty result.
pub fn separator(
    ts: &TransitionSystem,
    i: usize,
    j: usize,
) -> Result<SeparatorResult, Linear2Error> {
    let index = SecondOccurrenceIndex::new(ts)?;
    separator_indexed(&index, i, j)
}

/// [`separator`] over a prebuilt index; linear in the chain length.
pub fn separator_indexed(
    index: &SecondOccurrenceIndex,
    i: usize,
    j: usize,
) -> Result<SeparatorResult, Linear2Error> {
    let n = index.len();
    if i >= j || j > n {
        return Err(Linear2Error::IndexOutOfRange { i, j, n });
    }
    let result = |exit: usize, enter: Option<usize>| SeparatorResult {
        exit: Some(index.event(exit)),
        enter: enter.map(|k| index.event(k)),
    };
    let inside = |p: usize| i <= p && p < j;

    // A unique event between s_i and s_j: exit it.
    for k in i..j {
        if index.partner(k).is_none() {
            return Ok(result(k, None));
        }
    }

    // Leftmost event occurring before s_i whose partner lies between s_i
    // and s_j; pair its exit with an entering event between the two
    // occurrences of it that is unique or whose partner lies outside.
    if let Some(a) = (0..i).find(|&k| index.partner(k).is_some_and(inside)) {
        for k in a + 1..i {
            match index.partner(k) {
                None => return Ok(result(a, Some(k))),
                Some(p) if p < a || p >= j => return Ok(result(a, Some(k))),
                _ => {}
            }
        }
    }

    // Rightmost second occurrence after s_j of an event between s_i and
    // s_j; pair its exit with an entering event between s_j and it.
    if let Some(b) = (j..n).rev().find(|&k| index.partner(k).is_some_and(inside)) {
        for k in j..b {
            match index.partner(k) {
                None => return Ok(result(b, Some(k))),
                Some(p) if p < i || p > b => return Ok(result(b, Some(k))),
                _ => {}
            }
        }
    }

    Ok(SeparatorResult::default())
}

/// Result of running [`separator`] on every state pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Linear2Verdict {
    pub holds: bool,
    /// First pair `(i, j)` (by `i` ascending, `j` descending) without a
    /// separating result.
    pub counterexample: Option<(usize, usize)>,
    /// An exact 2-fold subsequence, present iff the SSP fails.
    pub exact_subsequence: Option<(usize, usize)>,
    /// Separator results for every separated pair `(i, j)`.
    pub witnesses: Vec<(usize, usize, SeparatorResult)>,
}

/// Decides the SSP of a linear 2-fold system by calling the separator on
/// all `|S|(|S|−1)/2` pairs after a single preprocessing step.
pub fn linear2_ssp(ts: &TransitionSystem) -> Result<Linear2Verdict, Linear2Error> {
    let index = SecondOccurrenceIndex::new(ts)?;
    let n = index.len();
    let mut counterexample = None;
    let mut witnesses = Vec::new();
    for i in 0..n {
        for j in (i + 1..=n).rev() {
            let r = separator_indexed(&index, i, j)?;
            if r.is_empty() {
                counterexample.get_or_insert((i, j));
            } else {
                witnesses.push((i, j, r));
            }
        }
    }
    Ok(Linear2Verdict {
        holds: counterexample.is_none(),
        counterexample,
        exact_subsequence: exact_2fold_subsequence(&index, ts.event_count()),
        witnesses,
    })
}
