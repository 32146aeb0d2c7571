//! Elementary net systems synthesized from region sets.
//!
//! Given a transition system `A` and a set `𝓡` of its regions, the
//! synthesized net has one place per region, one transition per event,
//! an arc `R -> e` for every event exiting `R`, an arc `e -> R` for every
//! event entering `R`, and the regions containing the initial state as its
//! initial marking. Its reachability graph relates back to `A` through
//! `ψ(s) = {R ∈ 𝓡 | s ∈ R}`.

use std::collections::{HashMap, HashSet, VecDeque};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::io::EnsFile;
use crate::regions::{check_region, Region};
use crate::ts::{Invariant, RawComponent, StateId, System, TransitionSystem, ValidationReport};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SynthesisError {
    #[error("region #{0} is not a region of the transition system")]
    InvalidRegion(usize),
    #[error("`{0}` is not deterministic")]
    Nondeterministic(String),
    #[error("net references unknown node `{0}`")]
    UnknownNode(String),
    #[error("flow `{0} -> {1}` must connect a place and a transition")]
    BadFlow(String, String),
}

/// Places, transitions, flow and initial marking. Markings are bit-vectors
/// over place ordinals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementaryNetSystem {
    places: Vec<String>,
    transitions: Vec<String>,
    /// Input places of each transition.
    pre: Vec<FixedBitSet>,
    /// Output places of each transition.
    post: Vec<FixedBitSet>,
    initial: FixedBitSet,
}

impl ElementaryNetSystem {
    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[String] {
        &self.transitions
    }

    pub fn transition(&self, name: &str) -> Option<usize> {
        self.transitions.iter().position(|t| t == name)
    }

    pub fn inputs(&self, t: usize) -> &FixedBitSet {
        &self.pre[t]
    }

    pub fn outputs(&self, t: usize) -> &FixedBitSet {
        &self.post[t]
    }

    pub fn initial(&self) -> &FixedBitSet {
        &self.initial
    }

    pub fn empty_marking(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.places.len())
    }

    /// `M [t> M'`: requires the inputs marked and the outputs unmarked;
    /// the inputs become unmarked and the outputs marked.
    pub fn fire(&self, marking: &FixedBitSet, t: usize) -> Option<FixedBitSet> {
        let (pre, post) = (&self.pre[t], &self.post[t]);
        if !pre.is_subset(marking) || !post.is_disjoint(marking) || !pre.is_disjoint(post) {
            return None;
        }
        let mut next = marking.clone();
        next.difference_with(pre);
        next.union_with(post);
        Some(next)
    }

    /// Flow arcs `(from, to)` by name: place→transition arcs first per
    /// transition, then transition→place.
    pub fn flows(&self) -> Vec<(String, String)> {
        let mut flows = Vec::new();
        for (t, name) in self.transitions.iter().enumerate() {
            for p in self.pre[t].ones() {
                flows.push((self.places[p].clone(), name.clone()));
            }
            for p in self.post[t].ones() {
                flows.push((name.clone(), self.places[p].clone()));
            }
        }
        flows
    }

    pub fn to_file(&self) -> EnsFile {
        EnsFile {
            places: self.places.clone(),
            transitions: self.transitions.clone(),
            flows: self.flows(),
            initial: self
                .initial
                .ones()
                .map(|p| self.places[p].clone())
                .collect(),
        }
    }

    pub fn from_file(file: &EnsFile) -> Result<Self, SynthesisError> {
        let place = |n: &str| file.places.iter().position(|p| p == n);
        let trans = |n: &str| file.transitions.iter().position(|t| t == n);
        let np = file.places.len();
        let mut pre = vec![FixedBitSet::with_capacity(np); file.transitions.len()];
        let mut post = pre.clone();
        for (a, b) in &file.flows {
            match (place(a), trans(a), place(b), trans(b)) {
                (Some(p), _, _, Some(t)) => pre[t].insert(p),
                (_, Some(t), Some(p), _) => post[t].insert(p),
                (None, None, ..) => return Err(SynthesisError::UnknownNode(a.clone())),
                (_, _, None, None) => return Err(SynthesisError::UnknownNode(b.clone())),
                _ => return Err(SynthesisError::BadFlow(a.clone(), b.clone())),
            }
        }
        let mut initial = FixedBitSet::with_capacity(np);
        for p in &file.initial {
            initial.insert(place(p).ok_or_else(|| SynthesisError::UnknownNode(p.clone()))?);
        }
        Ok(ElementaryNetSystem {
            places: file.places.clone(),
            transitions: file.transitions.clone(),
            pre,
            post,
            initial,
        })
    }
}

fn check_regions(ts: &System, regions: &[Region]) -> Result<(), SynthesisError> {
    for (i, r) in regions.iter().enumerate() {
        if r.members().len() != ts.state_count()
            || check_region(ts, r.members()).as_ref() != Some(r)
        {
            return Err(SynthesisError::InvalidRegion(i));
        }
    }
    Ok(())
}

/// The `𝓡`-restricted synthesized net; place `p<i>` is `regions[i]`.
pub fn synthesize(
    ts: &TransitionSystem,
    regions: &[Region],
) -> Result<ElementaryNetSystem, SynthesisError> {
    check_regions(ts, regions)?;
    let np = regions.len();
    let mut pre = vec![FixedBitSet::with_capacity(np); ts.event_count()];
    let mut post = pre.clone();
    for (p, r) in regions.iter().enumerate() {
        for e in r.exits() {
            pre[e.index()].insert(p);
        }
        for e in r.enters() {
            post[e.index()].insert(p);
        }
    }
    let mut initial = FixedBitSet::with_capacity(np);
    for (p, r) in regions.iter().enumerate() {
        if r.contains(ts.initial()) {
            initial.insert(p);
        }
    }
    Ok(ElementaryNetSystem {
        places: (0..np).map(|i| format!("p{i}")).collect(),
        transitions: ts.events().map(|e| ts.event_name(e).to_string()).collect(),
        pre,
        post,
        initial,
    })
}

/// The reachability graph of a net, as a possibly non-admissible system.
#[derive(Clone, Debug)]
pub struct ReachabilityGraph {
    /// States `M0, M1, …` in breadth-first discovery order.
    pub ts: TransitionSystem,
    /// Marking of each state, indexed like the states.
    pub markings: Vec<FixedBitSet>,
    /// Invariant violations of `ts` (loops, multi-edges, unused events).
    pub report: ValidationReport,
}

/// Breadth-first exploration of the reachable markings from `M0`.
pub fn reachability_graph(ens: &ElementaryNetSystem) -> ReachabilityGraph {
    let mut index: HashMap<FixedBitSet, usize> = HashMap::new();
    let mut markings = vec![ens.initial.clone()];
    index.insert(ens.initial.clone(), 0);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(m) = queue.pop_front() {
        for t in 0..ens.transitions.len() {
            if let Some(next) = ens.fire(&markings[m], t) {
                let target = *index.entry(next.clone()).or_insert_with(|| {
                    markings.push(next);
                    queue.push_back(markings.len() - 1);
                    markings.len() - 1
                });
                edges.push((
                    format!("M{m}"),
                    ens.transitions[t].clone(),
                    format!("M{target}"),
                ));
            }
        }
    }
    let ts = TransitionSystem::from_raw(RawComponent {
        name: "RG".to_string(),
        initial: "M0".to_string(),
        states: (0..markings.len()).map(|i| format!("M{i}")).collect(),
        events: ens.transitions.clone(),
        edges,
    })
    .expect("reachability graph is well formed");
    let report = ts.validate();
    ReachabilityGraph {
        ts,
        markings,
        report,
    }
}

/// `ψ(s) = {R ∈ regions | s ∈ R}` for every state, as place bit-vectors.
pub fn state_markings(ts: &System, regions: &[Region]) -> Vec<FixedBitSet> {
    ts.states()
        .map(|s| {
            let mut m = FixedBitSet::with_capacity(regions.len());
            for (p, r) in regions.iter().enumerate() {
                if r.contains(s) {
                    m.insert(p);
                }
            }
            m
        })
        .collect()
}

/// Whether `ψ` maps every edge `s -e-> s'` of `ts` to a firing
/// `ψ(s) [e> ψ(s')` of the synthesized net.
pub fn check_morphism(ts: &TransitionSystem, regions: &[Region]) -> Result<bool, SynthesisError> {
    let ens = synthesize(ts, regions)?;
    let psi = state_markings(ts, regions);
    Ok(ts.edges().iter().all(|edge| {
        ens.fire(&psi[edge.source.index()], edge.event.index())
            .as_ref()
            == Some(&psi[edge.target.index()])
    }))
}

fn require_deterministic(ts: &TransitionSystem) -> Result<(), SynthesisError> {
    if ts.validate().violates(Invariant::Deterministic) {
        return Err(SynthesisError::Nondeterministic(ts.name().to_string()));
    }
    Ok(())
}

/// Successor by event name.
fn step<'a>(ts: &'a TransitionSystem) -> impl Fn(StateId, &str) -> Option<StateId> + 'a {
    move |s, e| ts.event(e).and_then(|e| ts.successor(s, e))
}

fn enabled(ts: &TransitionSystem, s: StateId) -> HashSet<&str> {
    ts.out_edges(s)
        .iter()
        .map(|&i| ts.event_name(ts.edges()[i as usize].event))
        .collect()
}

/// Label- and initial-state-preserving isomorphism of deterministic,
/// reachable systems. Event identity is by name.
pub fn ts_isomorphic(a: &TransitionSystem, b: &TransitionSystem) -> Result<bool, SynthesisError> {
    require_deterministic(a)?;
    require_deterministic(b)?;
    if a.state_count() != b.state_count() || a.edges().len() != b.edges().len() {
        return Ok(false);
    }
    let next_b = step(b);
    let mut map: Vec<Option<StateId>> = vec![None; a.state_count()];
    let mut used = vec![false; b.state_count()];
    map[a.initial().index()] = Some(b.initial());
    used[b.initial().index()] = true;
    let mut queue = VecDeque::from([a.initial()]);
    let mut mapped = 1;
    while let Some(s) = queue.pop_front() {
        let image = map[s.index()].unwrap();
        if a.out_edges(s).len() != b.out_edges(image).len() {
            return Ok(false);
        }
        for &i in a.out_edges(s) {
            let edge = a.edges()[i as usize];
            let Some(t_img) = next_b(image, a.event_name(edge.event)) else {
                return Ok(false);
            };
            match map[edge.target.index()] {
                Some(prev) if prev != t_img => return Ok(false),
                Some(_) => {}
                None => {
                    if used[t_img.index()] {
                        return Ok(false);
                    }
                    used[t_img.index()] = true;
                    map[edge.target.index()] = Some(t_img);
                    mapped += 1;
                    queue.push_back(edge.target);
                }
            }
        }
    }
    Ok(mapped == a.state_count())
}

/// Equality of the prefix-closed label languages from the initial states,
/// by synchronized traversal of the deterministic product.
pub fn language_equal(a: &TransitionSystem, b: &TransitionSystem) -> Result<bool, SynthesisError> {
    require_deterministic(a)?;
    require_deterministic(b)?;
    let (next_a, next_b) = (step(a), step(b));
    let mut seen: HashSet<(StateId, StateId)> = HashSet::new();
    let mut queue = VecDeque::from([(a.initial(), b.initial())]);
    seen.insert((a.initial(), b.initial()));
    while let Some((s, t)) = queue.pop_front() {
        let (ea, eb) = (enabled(a, s), enabled(b, t));
        if ea != eb {
            return Ok(false);
        }
        for e in ea {
            let pair = (next_a(s, e).unwrap(), next_b(t, e).unwrap());
            if seen.insert(pair) {
                queue.push_back(pair);
            }
        }
    }
    Ok(true)
}
