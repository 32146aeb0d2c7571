//! Transition systems.
//!
//! Every decider in this crate works on a [`System`]: a flattened, indexed
//! edge-labelled graph made of one or more components. A plain
//! [`TransitionSystem`] is a system with exactly one component; a
//! [`TsUnion`](crate::unions::TsUnion) is a system with several components
//! that share events by name.
//!
//! States and events are identified by opaque strings. Their ordinals follow
//! declaration order, which fixes the iteration order of every algorithm and
//! makes witnesses reproducible.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::{Deref, Range};

use indexmap::IndexSet;
use serde::Serialize;
use thiserror::Error;

/// Ordinal of a state inside a [`System`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StateId(pub u32);

/// Ordinal of an event inside a [`System`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EventId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EventId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A labelled edge `source -event-> target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub source: StateId,
    pub event: EventId,
    pub target: StateId,
}

/// Structural problems that prevent a system from being built at all.
///
/// These are distinct from invariant violations (see [`Violation`]), which
/// are reported by [`System::validate`] on a system that was built.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StructuralError {
    #[error("transition system has no states")]
    NoStates,
    #[error("edge references undeclared state `{0}`")]
    UnknownState(String),
    #[error("edge references undeclared event `{0}`")]
    UnknownEvent(String),
    #[error("initial state `{0}` is not declared")]
    UnknownInitial(String),
    #[error("state `{0}` is declared twice")]
    DuplicateState(String),
    #[error("state `{name}` appears in components `{first}` and `{second}`")]
    StateClash {
        name: String,
        first: String,
        second: String,
    },
}

/// One component of a [`System`]; states and edges are stored contiguously.
#[derive(Clone, Debug)]
pub struct Component {
    name: String,
    initial: StateId,
    states: Range<u32>,
    edges: Range<u32>,
    events: Vec<EventId>,
}

impl Component {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.states.clone().map(StateId)
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.states.contains(&s.0)
    }

    pub fn edge_range(&self) -> Range<usize> {
        self.edges.start as usize..self.edges.end as usize
    }

    /// Events declared by this component, in declaration order.
    pub fn events(&self) -> &[EventId] {
        &self.events
    }
}

/// Description of one component, by name, used to assemble a [`System`].
#[derive(Clone, Debug, Default)]
pub struct RawComponent {
    pub name: String,
    pub initial: String,
    pub states: Vec<String>,
    pub events: Vec<String>,
    pub edges: Vec<(String, String, String)>,
}

/// A flattened, indexed collection of transition systems.
#[derive(Clone, Debug)]
pub struct System {
    states: IndexSet<String>,
    events: IndexSet<String>,
    edges: Vec<Edge>,
    components: Vec<Component>,
    state_component: Vec<u32>,
    event_edges: Vec<Vec<u32>>,
    out_edges: Vec<Vec<u32>>,
    in_edges: Vec<Vec<u32>>,
}

impl System {
    /// Assembles a system from named components. States must be pairwise
    /// disjoint across components; events with equal names are shared.
    pub fn from_components(raw: Vec<RawComponent>) -> Result<Self, StructuralError> {
        let mut states: IndexSet<String> = IndexSet::new();
        let mut events: IndexSet<String> = IndexSet::new();
        let mut owner: HashMap<String, usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut components = Vec::with_capacity(raw.len());
        let mut state_component = Vec::new();

        for (ci, comp) in raw.iter().enumerate() {
            if comp.states.is_empty() {
                return Err(StructuralError::NoStates);
            }
            let first_state = states.len() as u32;
            for name in &comp.states {
                if let Some(&other) = owner.get(name) {
                    if other == ci {
                        return Err(StructuralError::DuplicateState(name.clone()));
                    }
                    return Err(StructuralError::StateClash {
                        name: name.clone(),
                        first: raw[other].name.clone(),
                        second: comp.name.clone(),
                    });
                }
                owner.insert(name.clone(), ci);
                states.insert(name.clone());
                state_component.push(ci as u32);
            }
            let state_range = first_state..states.len() as u32;
            let lookup_state = |name: &str| -> Option<StateId> {
                states
                    .get_index_of(name)
                    .map(|i| i as u32)
                    .filter(|i| state_range.contains(i))
                    .map(StateId)
            };
            let initial = lookup_state(&comp.initial)
                .ok_or_else(|| StructuralError::UnknownInitial(comp.initial.clone()))?;

            let mut comp_events = Vec::with_capacity(comp.events.len());
            let mut declared: HashSet<&str> = HashSet::new();
            for name in &comp.events {
                if declared.insert(name) {
                    let (idx, _) = events.insert_full(name.clone());
                    comp_events.push(EventId(idx as u32));
                }
            }
            let first_edge = edges.len() as u32;
            for (s, e, t) in &comp.edges {
                let source =
                    lookup_state(s).ok_or_else(|| StructuralError::UnknownState(s.clone()))?;
                let target =
                    lookup_state(t).ok_or_else(|| StructuralError::UnknownState(t.clone()))?;
                if !declared.contains(e.as_str()) {
                    return Err(StructuralError::UnknownEvent(e.clone()));
                }
                let event = EventId(events.get_index_of(e.as_str()).unwrap() as u32);
                edges.push(Edge {
                    source,
                    event,
                    target,
                });
            }
            components.push(Component {
                name: comp.name.clone(),
                initial,
                states: state_range,
                edges: first_edge..edges.len() as u32,
                events: comp_events,
            });
        }

        let mut event_edges = vec![Vec::new(); events.len()];
        let mut out_edges = vec![Vec::new(); states.len()];
        let mut in_edges = vec![Vec::new(); states.len()];
        for (i, edge) in edges.iter().enumerate() {
            event_edges[edge.event.index()].push(i as u32);
            out_edges[edge.source.index()].push(i as u32);
            in_edges[edge.target.index()].push(i as u32);
        }
        Ok(System {
            states,
            events,
            edges,
            components,
            state_component,
            event_edges,
            out_edges,
            in_edges,
        })
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> {
        (0..self.events.len() as u32).map(EventId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.index()]
    }

    pub fn event_name(&self, e: EventId) -> &str {
        &self.events[e.index()]
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.states.get_index_of(name).map(|i| StateId(i as u32))
    }

    pub fn event(&self, name: &str) -> Option<EventId> {
        self.events.get_index_of(name).map(|i| EventId(i as u32))
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component_of(&self, s: StateId) -> usize {
        self.state_component[s.index()] as usize
    }

    /// Indices (into [`System::edges`]) of all edges labelled `e`.
    pub fn event_edges(&self, e: EventId) -> &[u32] {
        &self.event_edges[e.index()]
    }

    pub fn out_edges(&self, s: StateId) -> &[u32] {
        &self.out_edges[s.index()]
    }

    pub fn in_edges(&self, s: StateId) -> &[u32] {
        &self.in_edges[s.index()]
    }

    /// Number of edges labelled `e` across all components.
    pub fn occurrences(&self, e: EventId) -> usize {
        self.event_edges[e.index()].len()
    }

    /// Successor of `s` under `e`, if the (first) `e`-edge at `s` exists.
    pub fn successor(&self, s: StateId, e: EventId) -> Option<StateId> {
        self.out_edges[s.index()]
            .iter()
            .map(|&i| self.edges[i as usize])
            .find(|edge| edge.event == e)
            .map(|edge| edge.target)
    }

    /// Whether `e` occurs at `s`, i.e. `s` has an outgoing `e`-edge.
    pub fn occurs_at(&self, e: EventId, s: StateId) -> bool {
        self.successor(s, e).is_some()
    }

    /// Maximum number of edges any single event labels.
    pub fn manifoldness(&self) -> u32 {
        self.event_edges
            .iter()
            .map(|v| v.len() as u32)
            .max()
            .unwrap_or(0)
    }

    /// Maximum over states of the number of distinct successors and of
    /// distinct predecessors.
    pub fn degree(&self) -> u32 {
        let mut best = 0;
        for s in self.states() {
            let succ: HashSet<StateId> = self
                .out_edges(s)
                .iter()
                .map(|&i| self.edges[i as usize].target)
                .collect();
            let pred: HashSet<StateId> = self
                .in_edges(s)
                .iter()
                .map(|&i| self.edges[i as usize].source)
                .collect();
            best = best.max(succ.len() as u32).max(pred.len() as u32);
        }
        best
    }

    /// Checks the five admissibility invariants on every component and
    /// reports every violation found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for comp in &self.components {
            let edges = &self.edges[comp.edge_range()];
            let mut by_source_event: HashMap<(StateId, EventId), Vec<StateId>> = HashMap::new();
            let mut by_source_target: HashMap<(StateId, StateId), Vec<EventId>> = HashMap::new();
            for edge in edges {
                by_source_event
                    .entry((edge.source, edge.event))
                    .or_default()
                    .push(edge.target);
                by_source_target
                    .entry((edge.source, edge.target))
                    .or_default()
                    .push(edge.event);
            }
            let mut nondet: Vec<_> = by_source_event
                .into_iter()
                .filter(|(_, targets)| targets.len() > 1)
                .collect();
            nondet.sort();
            for ((s, e), targets) in nondet {
                violations.push(Violation::Nondeterministic {
                    state: self.state_name(s).to_string(),
                    event: self.event_name(e).to_string(),
                    targets: targets
                        .iter()
                        .map(|&t| self.state_name(t).to_string())
                        .collect(),
                });
            }
            let mut multi: Vec<_> = by_source_target
                .into_iter()
                .filter(|(_, events)| events.len() > 1)
                .collect();
            multi.sort();
            for ((s, t), events) in multi {
                violations.push(Violation::MultiEdge {
                    source: self.state_name(s).to_string(),
                    target: self.state_name(t).to_string(),
                    events: events
                        .iter()
                        .map(|&e| self.event_name(e).to_string())
                        .collect(),
                });
            }
            for edge in edges.iter().filter(|e| e.source == e.target) {
                violations.push(Violation::SelfLoop {
                    state: self.state_name(edge.source).to_string(),
                    event: self.event_name(edge.event).to_string(),
                });
            }
            let reached = self.reachable_from(comp.initial);
            for s in comp.states() {
                if !reached[s.index()] {
                    violations.push(Violation::Unreachable {
                        state: self.state_name(s).to_string(),
                    });
                }
            }
            let used: HashSet<EventId> = edges.iter().map(|e| e.event).collect();
            for &e in &comp.events {
                if !used.contains(&e) {
                    violations.push(Violation::UnusedEvent {
                        event: self.event_name(e).to_string(),
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    /// Forward reachability from `start`, indexed by state ordinal.
    pub fn reachable_from(&self, start: StateId) -> Vec<bool> {
        let mut seen = vec![false; self.state_count()];
        let mut queue = VecDeque::from([start]);
        seen[start.index()] = true;
        while let Some(s) = queue.pop_front() {
            for &i in self.out_edges(s) {
                let t = self.edges[i as usize].target;
                if !seen[t.index()] {
                    seen[t.index()] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// Re-exports component `ci` as a stand-alone description.
    pub fn raw_component(&self, ci: usize) -> RawComponent {
        let comp = &self.components[ci];
        RawComponent {
            name: comp.name.clone(),
            initial: self.state_name(comp.initial).to_string(),
            states: comp
                .states()
                .map(|s| self.state_name(s).to_string())
                .collect(),
            events: comp
                .events
                .iter()
                .map(|&e| self.event_name(e).to_string())
                .collect(),
            edges: self.edges[comp.edge_range()]
                .iter()
                .map(|e| {
                    (
                        self.state_name(e.source).to_string(),
                        self.event_name(e.event).to_string(),
                        self.state_name(e.target).to_string(),
                    )
                })
                .collect(),
        }
    }
}

impl AsRef<System> for System {
    fn as_ref(&self) -> &System {
        self
    }
}

/// The admissibility invariants a transition system must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Invariant {
    Deterministic,
    Simple,
    LoopFree,
    Reachable,
    Reduced,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::Deterministic => "deterministic",
            Invariant::Simple => "simple",
            Invariant::LoopFree => "loop-free",
            Invariant::Reachable => "reachable",
            Invariant::Reduced => "reduced",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "invariant", rename_all = "kebab-case")]
pub enum Violation {
    Nondeterministic {
        state: String,
        event: String,
        targets: Vec<String>,
    },
    MultiEdge {
        source: String,
        target: String,
        events: Vec<String>,
    },
    SelfLoop {
        state: String,
        event: String,
    },
    Unreachable {
        state: String,
    },
    UnusedEvent {
        event: String,
    },
}

impl Violation {
    pub fn invariant(&self) -> Invariant {
        match self {
            Violation::Nondeterministic { .. } => Invariant::Deterministic,
            Violation::MultiEdge { .. } => Invariant::Simple,
            Violation::SelfLoop { .. } => Invariant::LoopFree,
            Violation::Unreachable { .. } => Invariant::Reachable,
            Violation::UnusedEvent { .. } => Invariant::Reduced,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Nondeterministic {
                state,
                event,
                targets,
            } => write!(
                f,
                "deterministic: `{event}` leaves `{state}` towards {}",
                targets.join(", ")
            ),
            Violation::MultiEdge {
                source,
                target,
                events,
            } => write!(
                f,
                "simple: `{source}` -> `{target}` carries {}",
                events.join(", ")
            ),
            Violation::SelfLoop { state, event } => {
                write!(f, "loop-free: `{event}` loops at `{state}`")
            }
            Violation::Unreachable { state } => write!(f, "reachable: `{state}` is unreachable"),
            Violation::UnusedEvent { event } => write!(f, "reduced: `{event}` labels no edge"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, invariant: Invariant) -> bool {
        self.violations.iter().any(|v| v.invariant() == invariant)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Tight class parameters of a transition system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TsClass {
    /// Largest number of edges labelled by one event (`k`-fold).
    pub manifoldness: u32,
    /// Largest number of distinct successors or predecessors (`g`-grade).
    pub degree: u32,
    pub linear: bool,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("transition system is not linear")]
pub struct NotLinear;

/// A deterministic edge-labelled graph with an initial state.
#[derive(Clone, Debug)]
pub struct TransitionSystem {
    sys: System,
}

impl Deref for TransitionSystem {
    type Target = System;

    fn deref(&self) -> &System {
        &self.sys
    }
}

impl AsRef<System> for TransitionSystem {
    fn as_ref(&self) -> &System {
        &self.sys
    }
}

impl TransitionSystem {
    /// Builds a transition system from explicit parts. States and events
    /// keep the given order; edges must reference declared names.
    pub fn from_parts(
        name: impl Into<String>,
        states: Vec<String>,
        events: Vec<String>,
        initial: impl Into<String>,
        edges: Vec<(String, String, String)>,
    ) -> Result<Self, StructuralError> {
        Self::from_raw(RawComponent {
            name: name.into(),
            initial: initial.into(),
            states,
            events,
            edges,
        })
    }

    pub fn from_raw(raw: RawComponent) -> Result<Self, StructuralError> {
        let sys = System::from_components(vec![raw])?;
        Ok(TransitionSystem { sys })
    }

    pub fn builder(initial: impl Into<String>) -> TsBuilder {
        TsBuilder::new(initial)
    }

    pub fn system(&self) -> &System {
        &self.sys
    }

    pub fn name(&self) -> &str {
        self.sys.components[0].name()
    }

    pub fn initial(&self) -> StateId {
        self.sys.components[0].initial
    }

    /// Same system under a different component name.
    pub fn renamed(&self, name: impl Into<String>) -> TransitionSystem {
        let mut raw = self.raw();
        raw.name = name.into();
        TransitionSystem::from_raw(raw).expect("renaming preserves structure")
    }

    pub fn raw(&self) -> RawComponent {
        self.sys.raw_component(0)
    }

    pub fn classify(&self) -> TsClass {
        TsClass {
            manifoldness: self.sys.manifoldness(),
            degree: self.sys.degree(),
            linear: self.linear_chain().is_ok(),
        }
    }

    /// States and events of a linear system in chain order:
    /// `s_0 -e_1-> s_1 ... -e_t-> s_t`.
    pub fn linear_chain(&self) -> Result<LinearChain, NotLinear> {
        let init = self.initial();
        if !self.in_edges(init).is_empty() {
            return Err(NotLinear);
        }
        let mut states = vec![init];
        let mut events = Vec::new();
        let mut seen = vec![false; self.state_count()];
        seen[init.index()] = true;
        let mut cur = init;
        loop {
            let out = self.out_edges(cur);
            match out.len() {
                0 => break,
                1 => {
                    let edge = self.edges()[out[0] as usize];
                    if seen[edge.target.index()] || self.in_edges(edge.target).len() != 1 {
                        return Err(NotLinear);
                    }
                    seen[edge.target.index()] = true;
                    states.push(edge.target);
                    events.push(edge.event);
                    cur = edge.target;
                }
                _ => return Err(NotLinear),
            }
        }
        if states.len() != self.state_count() {
            return Err(NotLinear);
        }
        Ok(LinearChain { states, events })
    }

    /// The event sequence `e_1 ... e_t` of a linear system.
    pub fn linear_word(&self) -> Result<Vec<EventId>, NotLinear> {
        self.linear_chain().map(|c| c.events)
    }

    /// `linear_word` rendered with event names.
    pub fn linear_word_names(&self) -> Result<Vec<String>, NotLinear> {
        Ok(self
            .linear_word()?
            .into_iter()
            .map(|e| self.event_name(e).to_string())
            .collect())
    }

    /// Removes events that label no edge.
    pub fn reduced(&self) -> TransitionSystem {
        let mut raw = self.raw();
        let used: HashSet<&str> = raw.edges.iter().map(|(_, e, _)| e.as_str()).collect();
        raw.events = raw
            .events
            .iter()
            .filter(|e| used.contains(e.as_str()))
            .cloned()
            .collect();
        TransitionSystem::from_raw(raw).expect("reduction preserves structure")
    }
}

/// Name-based structural equality: equal initial state, state set, event
/// set and edge set. Declaration order is ignored.
impl PartialEq for TransitionSystem {
    fn eq(&self, other: &Self) -> bool {
        let a = self.raw();
        let b = other.raw();
        let set = |v: &Vec<String>| v.iter().cloned().collect::<HashSet<_>>();
        let edges = |v: &Vec<(String, String, String)>| v.iter().cloned().collect::<HashSet<_>>();
        a.initial == b.initial
            && set(&a.states) == set(&b.states)
            && set(&a.events) == set(&b.events)
            && a.edges.len() == b.edges.len()
            && edges(&a.edges) == edges(&b.edges)
    }
}

/// A linear system unrolled into its chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearChain {
    pub states: Vec<StateId>,
    pub events: Vec<EventId>,
}

/// Incremental construction with implicit declaration by use.
#[derive(Clone, Debug)]
pub struct TsBuilder {
    name: String,
    initial: String,
    states: IndexSet<String>,
    events: IndexSet<String>,
    edges: Vec<(String, String, String)>,
}

impl TsBuilder {
    pub fn new(initial: impl Into<String>) -> Self {
        let initial = initial.into();
        let mut states = IndexSet::new();
        states.insert(initial.clone());
        TsBuilder {
            name: "A".to_string(),
            initial,
            states,
            events: IndexSet::new(),
            edges: Vec::new(),
        }
    }

    pub fn name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn state(mut self, s: impl Into<String>) -> Self {
        self.states.insert(s.into());
        self
    }

    pub fn event(mut self, e: impl Into<String>) -> Self {
        self.events.insert(e.into());
        self
    }

    pub fn edge(
        mut self,
        s: impl Into<String>,
        e: impl Into<String>,
        t: impl Into<String>,
    ) -> Self {
        self.add_edge(s, e, t);
        self
    }

    pub fn add_edge(&mut self, s: impl Into<String>, e: impl Into<String>, t: impl Into<String>) {
        let (s, e, t) = (s.into(), e.into(), t.into());
        self.states.insert(s.clone());
        self.states.insert(t.clone());
        self.events.insert(e.clone());
        self.edges.push((s, e, t));
    }

    /// Appends a chain `from -e_1-> ... -e_n-> to_n` with the given states.
    pub fn chain<S: AsRef<str>, E: AsRef<str>>(mut self, states: &[S], events: &[E]) -> Self {
        assert_eq!(
            states.len(),
            events.len() + 1,
            "chain needs one more state than events"
        );
        for (i, e) in events.iter().enumerate() {
            self.add_edge(states[i].as_ref(), e.as_ref(), states[i + 1].as_ref());
        }
        self
    }

    pub fn build(self) -> Result<TransitionSystem, StructuralError> {
        TransitionSystem::from_parts(
            self.name,
            self.states.into_iter().collect(),
            self.events.into_iter().collect(),
            self.initial,
            self.edges,
        )
    }
}

/// A linear system `s0 -w[0]-> s1 ... -w[n-1]-> sn` with states named
/// `<prefix><i>`.
pub fn linear_ts<E: AsRef<str>>(prefix: &str, word: &[E]) -> TransitionSystem {
    let states: Vec<String> = (0..=word.len()).map(|i| format!("{prefix}{i}")).collect();
    TsBuilder::new(states[0].clone())
        .chain(&states, word)
        .build()
        .expect("chains are well formed")
}
