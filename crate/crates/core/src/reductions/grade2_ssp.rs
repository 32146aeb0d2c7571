//! SSP of a linear 3-fold system as SSP of a 2-fold union.
//!
//! Each event `e` occurring three times is replaced, occurrence by
//! occurrence along the chain, by copies `e.0`, `e.1`, `e.2`; the
//! duplicator `D_e` ties the copies together through the accordance events
//! `a.e.0`, `a.e.1` so that every region gives them one signature.

use std::collections::HashSet;

use crate::ts::{RawComponent, TransitionSystem};
use crate::unions::{JoinPlan, TsUnion};

use super::{
    check_source, component, Construction, GadgetInstance, KeyQuery, Provenance, ReductionError,
};

/// The three copies `e.0`, `e.1`, `e.2` of a 3-fold event.
pub fn copy_events(e: &str) -> [String; 3] {
    [0, 1, 2].map(|i| format!("{e}.{i}"))
}

/// The accordance events `a.e.0`, `a.e.1` of the duplicator of `e`.
pub fn accordance_events(e: &str) -> [String; 2] {
    [0, 1].map(|i| format!("a.{e}.{i}"))
}

fn duplicator(e: &str) -> RawComponent {
    let d = |s: usize| format!("d_{e}_{s}");
    let [c0, c1, c2] = copy_events(e);
    let [a0, a1] = accordance_events(e);
    component(
        format!("D_{e}"),
        &(0..6).map(d).collect::<Vec<_>>(),
        vec![
            (d(0), c0, d(1)),
            (d(0), a0.clone(), d(2)),
            (d(2), c1, d(3)),
            (d(2), a1.clone(), d(4)),
            (d(1), a0, d(3)),
            (d(3), a1, d(5)),
            (d(4), c2, d(5)),
        ],
    )
}

/// `U^A = U(A^2fold, D_{e_1}, …, D_{e_n})` over the 3-fold events
/// `e_1, …, e_n` in declaration order. The contract is the plain SSP.
pub fn build_2grade2_ssp(ts: &TransitionSystem) -> Result<GadgetInstance, ReductionError> {
    let chain = check_source(ts)?;
    let threefold: Vec<String> = ts
        .events()
        .filter(|&e| ts.occurrences(e) == 3)
        .map(|e| ts.event_name(e).to_string())
        .collect();

    let mut taken: HashSet<String> = ts.states().map(|s| ts.state_name(s).to_string()).collect();
    taken.extend(ts.events().map(|e| ts.event_name(e).to_string()));
    taken.insert(ts.name().to_string());
    for e in &threefold {
        let dup = duplicator(e);
        let generated = dup
            .states
            .iter()
            .chain(&dup.events)
            .chain(std::iter::once(&dup.name));
        for name in generated {
            if taken.contains(name) {
                return Err(ReductionError::NameClash(name.clone()));
            }
        }
    }

    let mut modified = ts.raw();
    let mut seen = vec![0usize; ts.event_count()];
    modified.edges = chain
        .events
        .iter()
        .enumerate()
        .map(|(pos, &e)| {
            let name = ts.event_name(e);
            let label = if threefold.iter().any(|t| t == name) {
                let copy = copy_events(name)[seen[e.index()]].clone();
                seen[e.index()] += 1;
                copy
            } else {
                name.to_string()
            };
            (
                ts.state_name(chain.states[pos]).to_string(),
                label,
                ts.state_name(chain.states[pos + 1]).to_string(),
            )
        })
        .collect();
    modified.events = modified
        .events
        .iter()
        .flat_map(|e| {
            if threefold.contains(e) {
                copy_events(e).to_vec()
            } else {
                vec![e.clone()]
            }
        })
        .collect();

    let mut comps = vec![modified];
    comps.extend(threefold.iter().map(|e| duplicator(e)));
    let union = TsUnion::from_raw(comps)?;
    let terminals: Vec<(String, String)> = threefold
        .iter()
        .map(|e| (format!("D_{e}"), format!("d_{e}_5")))
        .collect();
    let join_plan = JoinPlan::with_terminals(&union, &terminals)?;
    Ok(GadgetInstance {
        union,
        key_query: KeyQuery::Ssp,
        join_plan,
        provenance: Provenance {
            construction: Construction::TwoGrade2Ssp,
            source: ts.name().to_string(),
        },
    })
}
