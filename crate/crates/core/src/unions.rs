//! Unions of transition systems and their joining.
//!
//! A union groups state-disjoint transition systems so they can be treated
//! as one system: a region of the union is a membership over all states
//! with one signature shared by every component. Joining chains the
//! components into a single transition system through fresh connector
//! states `z+<i>` and events `y1+<i>`, `y2+<i>`:
//! `t^{i-1} -y1+i-> z+i -y2+i-> s_0^i`.

use std::collections::HashSet;
use std::ops::Deref;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::regions::{check_region, Region, Sign};
use crate::ts::{RawComponent, StructuralError, System, TransitionSystem};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum UnionError {
    #[error("a union needs at least one component")]
    Empty,
    #[error(transparent)]
    Structure(#[from] StructuralError),
    #[error("no component named `{0}`")]
    UnknownComponent(String),
    #[error("component `{component}` has no state `{state}`")]
    UnknownTerminal { component: String, state: String },
    #[error("component `{0}` needs an explicit terminal state")]
    MissingTerminal(String),
    #[error("connector name `{0}` is already in use")]
    ConnectorClash(String),
    #[error("component `{0}` is not linear")]
    NotLinear(String),
    #[error("component `{0}` has more than one edge with a non-obeying event")]
    LiftPrecondition(String),
    #[error("region does not belong to the union")]
    ForeignRegion,
    #[error("name `{0}` does not carry the expected prefix")]
    MissingPrefix(String),
}

/// An ordered union of state-disjoint transition systems.
#[derive(Clone, Debug)]
pub struct TsUnion {
    sys: System,
}

impl Deref for TsUnion {
    type Target = System;

    fn deref(&self) -> &System {
        &self.sys
    }
}

impl AsRef<System> for TsUnion {
    fn as_ref(&self) -> &System {
        &self.sys
    }
}

impl From<TransitionSystem> for TsUnion {
    /// The monadic union `U(A) = A`.
    fn from(ts: TransitionSystem) -> Self {
        TsUnion {
            sys: ts.system().clone(),
        }
    }
}

impl TsUnion {
    pub fn new(components: Vec<TransitionSystem>) -> Result<Self, UnionError> {
        Self::from_raw(components.iter().map(TransitionSystem::raw).collect())
    }

    pub fn from_raw(components: Vec<RawComponent>) -> Result<Self, UnionError> {
        if components.is_empty() {
            return Err(UnionError::Empty);
        }
        Ok(TsUnion {
            sys: System::from_components(components)?,
        })
    }

    /// `U(U_1, …, U_n)`: the flattened union of unions.
    pub fn flatten(unions: Vec<TsUnion>) -> Result<Self, UnionError> {
        Self::from_raw(unions.iter().flat_map(|u| u.raw_components()).collect())
    }

    pub fn system(&self) -> &System {
        &self.sys
    }

    pub fn raw_components(&self) -> Vec<RawComponent> {
        (0..self.sys.components().len())
            .map(|i| self.sys.raw_component(i))
            .collect()
    }

    pub fn component_ts(&self, i: usize) -> TransitionSystem {
        TransitionSystem::from_raw(self.sys.raw_component(i)).expect("component of a valid union")
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.sys.components().iter().position(|c| c.name() == name)
    }

    /// Whether all components have the same states, events and edges.
    pub fn same_components(&self, other: &TsUnion) -> bool {
        self.sys.components().len() == other.sys.components().len()
            && (0..self.sys.components().len())
                .all(|i| self.component_ts(i) == other.component_ts(i))
    }
}

/// Terminal states used when joining: entry `i` is the state of component
/// `i` that gets connected to the initial state of component `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinPlan {
    pub terminals: Vec<Option<String>>,
}

impl JoinPlan {
    /// Linear components default to their actual terminal state; others
    /// are left open and must be set explicitly.
    pub fn defaults(union: &TsUnion) -> Self {
        let n = union.components().len();
        let terminals = (0..n.saturating_sub(1))
            .map(|i| {
                let ts = union.component_ts(i);
                ts.linear_chain()
                    .ok()
                    .map(|chain| ts.state_name(*chain.states.last().unwrap()).to_string())
            })
            .collect();
        JoinPlan { terminals }
    }

    /// Defaults overridden by `(component, state)` pairs.
    pub fn with_terminals<C: AsRef<str>, S: AsRef<str>>(
        union: &TsUnion,
        pairs: &[(C, S)],
    ) -> Result<Self, UnionError> {
        let mut plan = JoinPlan::defaults(union);
        for (c, s) in pairs {
            let (c, s) = (c.as_ref(), s.as_ref());
            let ci = union
                .component_index(c)
                .ok_or_else(|| UnionError::UnknownComponent(c.to_string()))?;
            let state = union.state(s).filter(|&st| union.component_of(st) == ci);
            if state.is_none() {
                return Err(UnionError::UnknownTerminal {
                    component: c.to_string(),
                    state: s.to_string(),
                });
            }
            if ci < plan.terminals.len() {
                plan.terminals[ci] = Some(s.to_string());
            }
        }
        Ok(plan)
    }

    /// `(component, state)` pairs for every set terminal.
    pub fn pairs(&self, union: &TsUnion) -> Vec<(String, String)> {
        self.terminals
            .iter()
            .enumerate()
            .filter_map(|(i, t)| {
                t.as_ref()
                    .map(|t| (union.components()[i].name().to_string(), t.clone()))
            })
            .collect()
    }
}

pub fn connector_state(i: usize) -> String {
    format!("z+{i}")
}

pub fn connector_events(i: usize) -> (String, String) {
    (format!("y1+{i}"), format!("y2+{i}"))
}

/// The joining `A(U)`: union states and events first, then connectors.
pub fn join(union: &TsUnion, plan: &JoinPlan) -> Result<TransitionSystem, UnionError> {
    let comps = union.raw_components();
    let mut used: HashSet<&str> = HashSet::new();
    for c in &comps {
        used.extend(c.states.iter().map(String::as_str));
        used.extend(c.events.iter().map(String::as_str));
    }
    let mut raw = RawComponent {
        name: "A".to_string(),
        initial: comps[0].initial.clone(),
        ..RawComponent::default()
    };
    for c in &comps {
        raw.states.extend(c.states.iter().cloned());
        raw.events.extend(c.events.iter().cloned());
        raw.edges.extend(c.edges.iter().cloned());
    }
    for i in 1..comps.len() {
        let terminal = plan
            .terminals
            .get(i - 1)
            .cloned()
            .flatten()
            .ok_or_else(|| UnionError::MissingTerminal(comps[i - 1].name.clone()))?;
        if !comps[i - 1].states.contains(&terminal) {
            return Err(UnionError::UnknownTerminal {
                component: comps[i - 1].name.clone(),
                state: terminal,
            });
        }
        let z = connector_state(i);
        let (y1, y2) = connector_events(i);
        for name in [&z, &y1, &y2] {
            if used.contains(name.as_str()) {
                return Err(UnionError::ConnectorClash(name.clone()));
            }
        }
        raw.states.push(z.clone());
        raw.events.push(y1.clone());
        raw.events.push(y2.clone());
        raw.edges.push((terminal, y1, z.clone()));
        raw.edges.push((z, y2, comps[i].initial.clone()));
    }
    Ok(TransitionSystem::from_raw(raw)?)
}

/// Extends a region of `union` to the union with the linear `extras`
/// appended, keeping the signature: an extra component whose only
/// non-obeying edge is `s -e-> s'` receives the states after the edge if
/// `sig(e) = +1` and `s` with its predecessors if `sig(e) = −1`; a
/// component without such an edge receives nothing.
pub fn lift_region(
    union: &TsUnion,
    region: &Region,
    extras: &[TransitionSystem],
) -> Result<(TsUnion, Region), UnionError> {
    if region.members().len() != union.state_count() {
        return Err(UnionError::ForeignRegion);
    }
    let mut raw = union.raw_components();
    let mut lifted_members: Vec<bool> = union.states().map(|s| region.contains(s)).collect();
    let sign_of = |name: &str| {
        union
            .event(name)
            .map(|e| region.sign(e))
            .unwrap_or(Sign::Obey)
    };
    for ts in extras {
        let chain = ts
            .linear_chain()
            .map_err(|_| UnionError::NotLinear(ts.name().to_string()))?;
        let active: Vec<usize> = chain
            .events
            .iter()
            .enumerate()
            .filter(|(_, &e)| sign_of(ts.event_name(e)) != Sign::Obey)
            .map(|(k, _)| k)
            .collect();
        if active.len() > 1 {
            return Err(UnionError::LiftPrecondition(ts.name().to_string()));
        }
        // Position k: edge s_k -e_{k+1}-> s_{k+1}; P = {s_0, …, s_k}.
        let mut member = vec![false; chain.states.len()];
        if let Some(&k) = active.first() {
            let enter = sign_of(ts.event_name(chain.events[k])) == Sign::Enter;
            for (pos, m) in member.iter_mut().enumerate() {
                *m = if enter { pos > k } else { pos <= k };
            }
        }
        for s in ts.states() {
            let pos = chain.states.iter().position(|&c| c == s).unwrap();
            lifted_members.push(member[pos]);
        }
        raw.push(ts.raw());
    }
    let extended = TsUnion::from_raw(raw)?;
    let mut bits = FixedBitSet::with_capacity(extended.state_count());
    for (i, &m) in lifted_members.iter().enumerate() {
        bits.set(i, m);
    }
    let lifted = check_region(&extended, &bits).ok_or(UnionError::LiftPrecondition(
        "lifted membership".to_string(),
    ))?;
    Ok((extended, lifted))
}

/// Separator between the tag and the original name.
pub const TAG_SEPARATOR: char = ':';

/// Prefix `e:s:` used by [`rectify`].
pub fn rectify_prefix(event: &str, state: &str) -> String {
    format!("{event}{TAG_SEPARATOR}{state}{TAG_SEPARATOR}")
}

/// Renames every state, event and component `x` to `e:s:x`.
pub fn rectify(union: &TsUnion, event: &str, state: &str) -> TsUnion {
    let prefix = rectify_prefix(event, state);
    rename(union, |x| Some(format!("{prefix}{x}"))).expect("prefixing keeps names distinct")
}

/// Inverse of [`rectify`].
pub fn strip_prefix(union: &TsUnion, event: &str, state: &str) -> Result<TsUnion, UnionError> {
    let prefix = rectify_prefix(event, state);
    rename(union, |x| x.strip_prefix(&prefix).map(str::to_string))
}

fn rename(union: &TsUnion, f: impl Fn(&str) -> Option<String>) -> Result<TsUnion, UnionError> {
    let g = |x: &String| f(x).ok_or_else(|| UnionError::MissingPrefix(x.clone()));
    let mut comps = Vec::new();
    for c in union.raw_components() {
        comps.push(RawComponent {
            name: g(&c.name)?,
            initial: g(&c.initial)?,
            states: c.states.iter().map(g).collect::<Result<_, _>>()?,
            events: c.events.iter().map(g).collect::<Result<_, _>>()?,
            edges: c
                .edges
                .iter()
                .map(|(s, e, t)| Ok((g(s)?, g(e)?, g(t)?)))
                .collect::<Result<_, UnionError>>()?,
        });
    }
    TsUnion::from_raw(comps)
}

/// Carries a region across a state renaming: the membership of `to` is the
/// image of `region` under `f`. `None` if some state of `to` has no
/// preimage or the image is not a region.
pub fn transport_region(
    region: &Region,
    from: &System,
    to: &System,
    f: impl Fn(&str) -> String,
) -> Option<Region> {
    let mut bits = FixedBitSet::with_capacity(to.state_count());
    let mut hit = 0;
    for s in from.states() {
        let target = to.state(&f(from.state_name(s)))?;
        hit += 1;
        bits.set(target.index(), region.contains(s));
    }
    if hit != to.state_count() {
        return None;
    }
    check_region(to, &bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::{enumerate_regions, region_from_names};
    use crate::ts::{linear_ts, TsBuilder};

    #[test]
    fn monadic_union_is_the_ts() {
        let m = linear_ts("m", &["k", "z_0", "o_0", "k"]);
        let u = TsUnion::from(m.clone());
        assert_eq!(u.component_ts(0), m);
        let plan = JoinPlan::defaults(&u);
        assert_eq!(join(&u, &plan).unwrap(), m);
    }

    #[test]
    fn flatten_is_structural() {
        let a = linear_ts("a", &["x"]);
        let b = linear_ts("b", &["y"]);
        let c = linear_ts("c", &["z"]);
        let ab = TsUnion::new(vec![a.clone(), b.clone()]).unwrap();
        let nested = TsUnion::flatten(vec![ab, TsUnion::from(c.clone())]).unwrap();
        let flat = TsUnion::new(vec![a, b, c]).unwrap();
        assert!(nested.same_components(&flat));
    }

    #[test]
    fn state_clash_names_the_state() {
        let a = linear_ts("s", &["x"]);
        let b = linear_ts("s", &["y"]);
        match TsUnion::new(vec![a, b]) {
            Err(UnionError::Structure(StructuralError::StateClash { name, .. })) => {
                assert_eq!(name, "s0")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn joining_two_single_edges() {
        let u = TsUnion::new(vec![linear_ts("a", &["x"]), linear_ts("b", &["y"])]).unwrap();
        let joined = join(&u, &JoinPlan::defaults(&u)).unwrap();
        assert!(joined.validate().is_empty());
        assert_eq!(joined.state_count(), 5);
        assert_eq!(
            joined.linear_word_names().unwrap(),
            ["x", "y1+1", "y2+1", "y"]
        );
    }

    #[test]
    fn non_linear_components_need_terminals() {
        let branching = TsBuilder::new("b0")
            .name("B")
            .edge("b0", "p", "b1")
            .edge("b0", "q", "b2")
            .build()
            .unwrap();
        let u = TsUnion::new(vec![branching, linear_ts("c", &["r"])]).unwrap();
        assert_eq!(
            join(&u, &JoinPlan::defaults(&u)).unwrap_err(),
            UnionError::MissingTerminal("B".into())
        );
        let plan = JoinPlan::with_terminals(&u, &[("B", "b2")]).unwrap();
        let joined = join(&u, &plan).unwrap();
        assert!(joined.validate().is_empty());
        assert!(JoinPlan::with_terminals(&u, &[("B", "c0")]).is_err());
    }

    #[test]
    fn connector_clash_is_detected() {
        let u = TsUnion::new(vec![linear_ts("z+", &["x"]), linear_ts("b", &["y"])]).unwrap();
        assert_eq!(
            join(&u, &JoinPlan::defaults(&u)).unwrap_err(),
            UnionError::ConnectorClash("z+1".into())
        );
    }

    #[test]
    fn lifting_follows_the_single_active_edge() {
        let base = TsUnion::from(linear_ts("m", &["e", "f"]));
        // sig(e) = +1, sig(f) = 0.
        let r = region_from_names(&base, &["m1", "m2"]).unwrap();
        let extra_enter = TsBuilder::new("a0")
            .name("X")
            .chain(&["a0", "a1", "a2", "a3"], &["g", "e", "h"])
            .build()
            .unwrap();
        let extra_idle = linear_ts("b", &["g2", "f"]).renamed("Y");
        let (ext, lifted) = lift_region(&base, &r, &[extra_enter, extra_idle]).unwrap();
        let names: Vec<&str> = lifted.member_states().map(|s| ext.state_name(s)).collect();
        assert_eq!(names, ["m1", "m2", "a2", "a3"]);
        assert_eq!(lifted.sign(ext.event("e").unwrap()), Sign::Enter);

        let r_exit = r.complement();
        let extra = linear_ts("c", &["g", "e", "h"]);
        let (ext, lifted) = lift_region(&base, &r_exit, &[extra]).unwrap();
        let names: Vec<&str> = lifted.member_states().map(|s| ext.state_name(s)).collect();
        assert_eq!(names, ["m0", "c0", "c1"]);
    }

    #[test]
    fn lifting_refuses_two_active_edges() {
        let base = TsUnion::from(linear_ts("m", &["e"]));
        let r = region_from_names(&base, &["m1"]).unwrap();
        let extra = linear_ts("c", &["e", "g", "e"]).renamed("C");
        assert_eq!(
            lift_region(&base, &r, &[extra]).unwrap_err(),
            UnionError::LiftPrecondition("C".into())
        );
    }

    #[test]
    fn rectify_round_trip_and_regions() {
        let u = TsUnion::new(vec![
            linear_ts("a", &["x", "y", "x"]),
            linear_ts("b", &["y"]),
        ])
        .unwrap();
        let r = rectify(&u, "x", "a2");
        assert!(r.state("x:a2:a0").is_some());
        assert!(r.event("x:a2:y").is_some());
        assert!(strip_prefix(&r, "x", "a2").unwrap().same_components(&u));
        assert!(strip_prefix(&u, "x", "a2").is_err());
        let here = enumerate_regions(&u, 22).unwrap();
        let there = enumerate_regions(&r, 22).unwrap();
        assert_eq!(here.len(), there.len());
        for region in &here {
            let image = transport_region(region, &u, &r, |x| format!("x:a2:{x}"));
            assert!(image.is_some_and(|img| there.contains(&img)));
        }
        let other = rectify(&u, "y", "a0");
        let names = |s: &System| {
            s.states()
                .map(|x| s.state_name(x).to_string())
                .collect::<HashSet<_>>()
        };
        assert!(names(&r).is_disjoint(&names(&other)));
    }
}
