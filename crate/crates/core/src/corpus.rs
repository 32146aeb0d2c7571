//! Test and benchmark corpora: exhaustive small linear words and seeded
//! random systems and unions.
//!
//! Everything here is deterministic given the random generator, so a seed
//! reproduces a corpus exactly.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ts::{linear_ts, TransitionSystem, TsBuilder};
use crate::unions::TsUnion;

fn letter(i: usize) -> String {
    if i < 26 {
        char::from(b'a' + i as u8).to_string()
    } else {
        format!("e{i}")
    }
}

/// Every word of length `1..=max_len` up to renaming of events (restricted
/// growth strings over `a, b, c, …`) in which no event occurs more than
/// `max_fold` times. Shorter words first, then lexicographic.
pub fn linear_words(max_len: usize, max_fold: usize) -> Vec<Vec<String>> {
    fn extend(
        word: &mut Vec<usize>,
        counts: &mut Vec<usize>,
        len: usize,
        max_fold: usize,
        out: &mut Vec<Vec<String>>,
    ) {
        if word.len() == len {
            out.push(word.iter().map(|&i| letter(i)).collect());
            return;
        }
        for i in 0..=counts.len() {
            if i == counts.len() {
                counts.push(0);
            }
            if counts[i] < max_fold {
                counts[i] += 1;
                word.push(i);
                extend(word, counts, len, max_fold, out);
                word.pop();
                counts[i] -= 1;
            }
            if counts[i] == 0 {
                counts.pop();
            }
        }
    }
    let mut out = Vec::new();
    for len in 1..=max_len {
        extend(&mut Vec::new(), &mut Vec::new(), len, max_fold, &mut out);
    }
    out
}

/// [`linear_words`] as linear systems `s0 -w[0]-> s1 …`, each named after
/// its word (`w_abab`).
pub fn linear_corpus(max_len: usize, max_fold: usize) -> Vec<TransitionSystem> {
    linear_words(max_len, max_fold)
        .into_iter()
        .map(|w| linear_ts("s", &w).renamed(format!("w_{}", w.concat())))
        .collect()
}

/// A random word of length `len` over `alphabet` events in which no event
/// occurs more than `max_fold` times. Panics if `alphabet * max_fold < len`.
pub fn random_word<R: Rng + ?Sized>(
    rng: &mut R,
    len: usize,
    alphabet: usize,
    max_fold: usize,
) -> Vec<String> {
    assert!(
        alphabet * max_fold >= len,
        "alphabet too small for the word"
    );
    let mut counts = vec![0usize; alphabet];
    // Events that may still occur, kept in ascending order.
    let mut free: Vec<usize> = (0..alphabet).collect();
    (0..len)
        .map(|_| {
            let &i = free.choose(rng).expect("capacity checked");
            counts[i] += 1;
            if counts[i] == max_fold {
                let at = free.binary_search(&i).expect("chosen from the list");
                free.remove(at);
            }
            format!("e{i}")
        })
        .collect()
}

/// A random linear `max_fold`-fold system with `states` states, events
/// drawn from an alphabet just large enough to make every fold reachable.
pub fn random_linear<R: Rng + ?Sized>(
    rng: &mut R,
    states: usize,
    max_fold: usize,
) -> TransitionSystem {
    let len = states.saturating_sub(1);
    let alphabet = (len.div_ceil(max_fold)).max(1) + rng.gen_range(0..=len / 2);
    linear_ts("s", &random_word(rng, len, alphabet, max_fold))
}

/// A random admissible system with `states` states: a random spanning tree
/// from `s0` plus up to `extra` further edges, labelled from `events`
/// candidates while keeping it deterministic, simple and loop-free.
pub fn random_ts<R: Rng + ?Sized>(
    rng: &mut R,
    states: usize,
    events: usize,
    extra: usize,
) -> TransitionSystem {
    assert!(states >= 1 && events >= 1);
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); states];
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    let linked = |edges: &[(usize, usize, usize)], s: usize, t: usize| {
        edges.iter().any(|&(a, _, b)| (a, b) == (s, t))
    };
    for t in 1..states {
        let mut parents: Vec<usize> = (0..t).collect();
        parents.shuffle(rng);
        let parent = parents.into_iter().find(|&p| out[p].len() < events);
        // With a single event a tree may need a fresh parent; fall back to
        // the previous state, whose out-degree is at most its child count.
        let p = parent.unwrap_or(t - 1);
        let free: Vec<usize> = (0..events).filter(|e| !out[p].contains(e)).collect();
        let e = *free.choose(rng).unwrap_or(&0);
        if out[p].contains(&e) {
            continue;
        }
        out[p].push(e);
        edges.push((p, e, t));
    }
    for _ in 0..extra {
        let s = rng.gen_range(0..states);
        let t = rng.gen_range(0..states);
        if s == t || linked(&edges, s, t) || out[s].len() >= events {
            continue;
        }
        let free: Vec<usize> = (0..events).filter(|e| !out[s].contains(e)).collect();
        let e = *free.choose(rng).expect("out-degree below event count");
        out[s].push(e);
        edges.push((s, e, t));
    }
    let mut b = TsBuilder::new("s0");
    for i in 1..states {
        b = b.state(format!("s{i}"));
    }
    for (s, e, t) in edges {
        b.add_edge(format!("s{s}"), format!("e{e}"), format!("s{t}"));
    }
    let ts = b.build().expect("generated edges are well formed");
    // States cut off by a failed tree link are dropped again.
    let reach = ts.reachable_from(ts.initial());
    if reach.iter().all(|&r| r) {
        ts
    } else {
        restrict_reachable(&ts, &reach)
    }
}

fn restrict_reachable(ts: &TransitionSystem, reach: &[bool]) -> TransitionSystem {
    let mut b = TsBuilder::new(ts.state_name(ts.initial()));
    for edge in ts.edges() {
        if reach[edge.source.index()] {
            b.add_edge(
                ts.state_name(edge.source),
                ts.event_name(edge.event),
                ts.state_name(edge.target),
            );
        }
    }
    b.build().expect("sub-system of a valid system")
}

/// A union of `1..=max_components` random linear 2-fold systems with
/// `2..=max_states` states each. Components are named `A0, A1, …` with
/// states `a0_0, …`; events come from a shared pool, so components may
/// share events, but every event occurs at most twice per component.
pub fn random_linear_union<R: Rng + ?Sized>(
    rng: &mut R,
    max_components: usize,
    max_states: usize,
) -> TsUnion {
    let n = rng.gen_range(1..=max_components);
    let comps = (0..n)
        .map(|c| {
            let states = rng.gen_range(2..=max_states);
            let word = random_word(rng, states - 1, (states - 1).div_ceil(2) + 1, 2);
            linear_ts(&format!("a{c}_"), &word).renamed(format!("A{c}"))
        })
        .collect();
    TsUnion::new(comps).expect("component state names are disjoint")
}
