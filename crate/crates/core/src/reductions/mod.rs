//! Generators for the four NP-hardness constructions.
//!
//! Two constructions encode a cubic monotone one-in-three 3-SAT formula as
//! the inhibition of a key event at a key state (a linear 3-fold union and a
//! 2-grade 2-fold union). Two turn a linear 3-fold transition system into a
//! union whose state separation mirrors a property of the input (ESSP of the
//! input as SSP of a linear 3-fold union; SSP of the input as SSP of a
//! 2-grade 2-fold union).
//!
//! Generated names follow the gadget subscripts: `m6`, `f_3_5`, `k_17`,
//! `h_0_8`, `X.2.5` for the representer of variable 5 in clause 2.

mod formula;
mod grade2_essp;
mod grade2_ssp;
mod linear3_essp;
mod linear3_ssp;

use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::regions::{check_region, Region};
use crate::ts::{RawComponent, StateId, System, TransitionSystem};
use crate::unions::{join, JoinPlan, TsUnion, UnionError};

pub use formula::{find_one_in_three_models, CubicMonotoneFormula, FormulaError, OneInThreeModel};

pub use grade2_essp::{
    barter_keys, build_2grade2_essp, build_key_region_2grade2, decode_model_2grade2,
    translator_union_2grade2,
};
pub use grade2_ssp::{accordance_events, build_2grade2_ssp, copy_events};
pub use linear3_essp::{
    basic_key_region_linear3, basic_union_linear3, build_key_region_linear3, build_linear3_essp,
    decode_model_linear3, translator_template_linear3, translator_union_linear3, TranslatorChoice,
};
pub use linear3_ssp::{build_linear3_ssp, key_pair, key_region_items, query_union, KeyRegionItems};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("the construction needs a validated formula")]
    Unchecked,
    #[error("the variable set is not a one-in-three model of the formula")]
    NotModel,
    #[error("input transition system is not linear")]
    NotLinear,
    #[error("input transition system is {0}-fold, at most 3-fold is required")]
    TooManifold(u32),
    #[error("input transition system violates admissibility: {0}")]
    Invalid(String),
    #[error("generated name `{0}` clashes with a name of the input")]
    NameClash(String),
    #[error("input has no event/state pair to encode")]
    NoQueries,
    #[error(transparent)]
    Union(#[from] UnionError),
}

/// Which of the four constructions produced an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Construction {
    Linear3Essp,
    Linear3Ssp,
    TwoGrade2Essp,
    TwoGrade2Ssp,
}

impl Construction {
    pub const ALL: [Construction; 4] = [
        Construction::Linear3Essp,
        Construction::Linear3Ssp,
        Construction::TwoGrade2Essp,
        Construction::TwoGrade2Ssp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Construction::Linear3Essp => "linear3-essp",
            Construction::Linear3Ssp => "linear3-ssp",
            Construction::TwoGrade2Essp => "2grade2-essp",
            Construction::TwoGrade2Ssp => "2grade2-ssp",
        }
    }

    /// Whether the input is a formula (otherwise a transition system).
    pub fn takes_formula(self) -> bool {
        matches!(
            self,
            Construction::Linear3Essp | Construction::TwoGrade2Essp
        )
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Construction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Construction::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown construction `{s}`"))
    }
}

/// The designated query whose answer encodes the source instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KeyQuery {
    /// Inhibit `event` at `state`.
    Inhibit { event: String, state: String },
    /// Separate every listed pair of states.
    Separate(Vec<(String, String)>),
    /// The plain SSP of the union.
    Ssp,
}

/// Where an instance came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub construction: Construction,
    /// The formula in `.cnf3` form, or the name of the input system.
    pub source: String,
}

/// A generated union with its key query and joining plan.
#[derive(Clone, Debug)]
pub struct GadgetInstance {
    pub union: TsUnion,
    pub key_query: KeyQuery,
    pub join_plan: JoinPlan,
    pub provenance: Provenance,
}

impl GadgetInstance {
    /// The joining of the union along the instance's plan.
    pub fn joined(&self) -> Result<TransitionSystem, UnionError> {
        join(&self.union, &self.join_plan)
    }

    /// Indices of the key query's event and state, for inhibition queries.
    pub fn key_inhibition(&self) -> Option<(crate::ts::EventId, StateId)> {
        match &self.key_query {
            KeyQuery::Inhibit { event, state } => {
                Some((self.union.event(event)?, self.union.state(state)?))
            }
            KeyQuery::Separate(_) | KeyQuery::Ssp => None,
        }
    }

    /// Index pairs of the key states, for separation queries.
    pub fn key_separations(&self) -> Vec<(StateId, StateId)> {
        match &self.key_query {
            KeyQuery::Separate(pairs) => pairs
                .iter()
                .filter_map(|(s, t)| Some((self.union.state(s)?, self.union.state(t)?)))
                .collect(),
            KeyQuery::Inhibit { .. } | KeyQuery::Ssp => Vec::new(),
        }
    }

    /// Text manifest of the key query: `inhibit <e> <s>`, one
    /// `separate <s> <t>` line per pair, or `ssp`.
    pub fn key_manifest(&self) -> String {
        let mut out = format!("construction {}\n", self.provenance.construction.name());
        match &self.key_query {
            KeyQuery::Inhibit { event, state } => {
                out.push_str(&format!("inhibit {event} {state}\n"))
            }
            KeyQuery::Separate(pairs) => {
                for (s, t) in pairs {
                    out.push_str(&format!("separate {s} {t}\n"));
                }
            }
            KeyQuery::Ssp => out.push_str("ssp\n"),
        }
        out
    }
}

/// Builds a component from edges; events are declared in order of first
/// use and states in the given order.
fn component<S: AsRef<str>>(
    name: impl Into<String>,
    states: &[S],
    edges: Vec<(String, String, String)>,
) -> RawComponent {
    let mut events: Vec<String> = Vec::new();
    for (_, e, _) in &edges {
        if !events.contains(e) {
            events.push(e.clone());
        }
    }
    RawComponent {
        name: name.into(),
        initial: states[0].as_ref().to_string(),
        states: states.iter().map(|s| s.as_ref().to_string()).collect(),
        events,
        edges,
    }
}

/// The linear component `s_0 -e_1-> s_1 ... -e_t-> s_t`.
fn chain<S: AsRef<str>, E: AsRef<str>>(
    name: impl Into<String>,
    states: &[S],
    events: &[E],
) -> RawComponent {
    assert_eq!(states.len(), events.len() + 1);
    let edges = events
        .iter()
        .enumerate()
        .map(|(i, e)| {
            (
                states[i].as_ref().to_string(),
                e.as_ref().to_string(),
                states[i + 1].as_ref().to_string(),
            )
        })
        .collect();
    component(name, states, edges)
}

/// `prefix0, …, prefix{n-1}`.
fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// The region of `sys` whose members are exactly the named states, if it
/// is one. Panics on unknown names: used for templates over generated
/// systems.
fn region_of_names(sys: &System, names: &[String]) -> Option<Region> {
    let mut bits = FixedBitSet::with_capacity(sys.state_count());
    for n in names {
        let s = sys
            .state(n)
            .unwrap_or_else(|| panic!("template state `{n}` not in system"));
        bits.insert(s.index());
    }
    check_region(sys, &bits)
}

/// Input checks shared by the constructions that start from a system.
fn check_source(ts: &TransitionSystem) -> Result<crate::ts::LinearChain, ReductionError> {
    let report = ts.validate();
    if !report.is_empty() {
        return Err(ReductionError::Invalid(report.to_string()));
    }
    let chain = ts.linear_chain().map_err(|_| ReductionError::NotLinear)?;
    let k = ts.manifoldness();
    if k > 3 {
        return Err(ReductionError::TooManifold(k));
    }
    Ok(chain)
}
