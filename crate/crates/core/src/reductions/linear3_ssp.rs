//! ESSP of a linear 3-fold system as SSP of a linear 3-fold union.
//!
//! For every event `e` and state `s` of the input with no `e`-edge leaving
//! `s`, the union `U^e_s = U(M, D_0, …, D_4, P, C)` has key states `m0`,
//! `m1` that are separable exactly when `e` is inhibitable at `s`. The
//! mapper `M` forces `e` to exit, the duplicators pass that signature on to
//! the `e`-copies `e_1, e_3, …, e_9`, the provider `P` turns it into an
//! entering `h_1` and an exiting `h_2`, and the copy `C` of the input
//! (events renamed `c.<e'>`, states `c.<s'>`, occurrences of `e` replaced by
//! `e_1, e_3, e_5`, and `c.<s> -h_1-> p -h_2-> s.split` spliced in at `s`)
//! turns that into an inhibiting region of the input. Every sub-union is
//! rectified with the prefix `<e>:<s>:` so that they are pairwise disjoint.

use fixedbitset::FixedBitSet;

use crate::regions::{check_region, Region, Sign};
use crate::ts::{RawComponent, System, TransitionSystem};
use crate::unions::{rectify, rectify_prefix, JoinPlan, TsUnion};

use super::{
    chain, check_source, component, numbered, Construction, GadgetInstance, KeyQuery, Provenance,
    ReductionError,
};

const SPLIT: &str = "s.split";
const DETOUR: &str = "p";

fn mapper() -> RawComponent {
    chain("M", &numbered("m", 6), &["e", "v_0", "e", "v_1", "e"])
}

fn duplicator(j: usize) -> RawComponent {
    let v = |i: usize| format!("v_{i}");
    let e = |i: usize| format!("e_{i}");
    let b = |i: usize| format!("b_{i}");
    chain(
        format!("D_{j}"),
        &numbered(&format!("d_{j}_"), 14),
        &[
            v(2 * j),
            e(2 * j),
            v(2 * j + 1),
            b(2 * j),
            v(2 * j),
            e(2 * j + 1),
            v(2 * j + 1),
            b(2 * j + 1),
            e(2 * j),
            v(2 * j + 2),
            e(2 * j + 1),
            v(2 * j + 3),
            e(2 * j),
        ],
    )
}

fn provider() -> RawComponent {
    chain(
        "P",
        &numbered("p_", 8),
        &["e_7", "h_1", "e_9", "b", "v_10", "h_2", "v_11"],
    )
}

/// The copy of `ts` for the query `(e, s)`.
fn copy(ts: &TransitionSystem, e: &str, s: &str) -> RawComponent {
    let chain = ts.linear_chain().expect("checked linear");
    let mut states = Vec::new();
    for &x in &chain.states {
        let name = ts.state_name(x);
        states.push(format!("c.{name}"));
        if name == s {
            states.push(DETOUR.to_string());
            states.push(SPLIT.to_string());
        }
    }
    let mut copies = ["e_1", "e_3", "e_5"].into_iter();
    let mut edges = Vec::new();
    for (pos, &ev) in chain.events.iter().enumerate() {
        let from = ts.state_name(chain.states[pos]);
        let to = ts.state_name(chain.states[pos + 1]);
        if from == s {
            edges.push((format!("c.{s}"), "h_1".to_string(), DETOUR.to_string()));
            edges.push((DETOUR.to_string(), "h_2".to_string(), SPLIT.to_string()));
        }
        let label = if ts.event_name(ev) == e {
            copies
                .next()
                .expect("at most three occurrences")
                .to_string()
        } else {
            format!("c.{}", ts.event_name(ev))
        };
        let source = if from == s {
            SPLIT.to_string()
        } else {
            format!("c.{from}")
        };
        edges.push((source, label, format!("c.{to}")));
    }
    if ts.state_name(*chain.states.last().unwrap()) == s {
        edges.push((format!("c.{s}"), "h_1".to_string(), DETOUR.to_string()));
        edges.push((DETOUR.to_string(), "h_2".to_string(), SPLIT.to_string()));
    }
    component("C", &states, edges)
}

/// The unrectified union `U^e_s = U(M, D_0, …, D_4, P, C)`.
pub fn query_union(ts: &TransitionSystem, e: &str, s: &str) -> Result<TsUnion, ReductionError> {
    check_source(ts)?;
    let mut comps = vec![mapper()];
    comps.extend((0..5).map(duplicator));
    comps.push(provider());
    comps.push(copy(ts, e, s));
    Ok(TsUnion::from_raw(comps)?)
}

/// Rectified key states `(e:s:m0, e:s:m1)` of the query `(e, s)`.
pub fn key_pair(e: &str, s: &str) -> (String, String) {
    let prefix = rectify_prefix(e, s);
    (format!("{prefix}m0"), format!("{prefix}m1"))
}

/// The union of all rectified `U^e_s` for the event/state pairs of `ts`
/// without an `e`-edge at `s` (events outer, states inner, declaration
/// order), with all key pairs as the key query.
pub fn build_linear3_ssp(ts: &TransitionSystem) -> Result<GadgetInstance, ReductionError> {
    check_source(ts)?;
    let mut parts = Vec::new();
    let mut pairs = Vec::new();
    for e in ts.events() {
        for s in ts.states() {
            if ts.occurs_at(e, s) {
                continue;
            }
            let (en, sn) = (ts.event_name(e), ts.state_name(s));
            parts.push(rectify(&query_union(ts, en, sn)?, en, sn));
            pairs.push(key_pair(en, sn));
        }
    }
    if parts.is_empty() {
        return Err(ReductionError::NoQueries);
    }
    let union = TsUnion::flatten(parts)?;
    let join_plan = JoinPlan::defaults(&union);
    Ok(GadgetInstance {
        union,
        key_query: KeyQuery::Separate(pairs),
        join_plan,
        provenance: Provenance {
            construction: Construction::Linear3Ssp,
            source: ts.name().to_string(),
        },
    })
}

/// The seven structural facts a key-separating region has to satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyRegionItems {
    pub items: [bool; 7],
}

impl KeyRegionItems {
    pub fn all(&self) -> bool {
        self.items.iter().all(|&b| b)
    }

    /// 1-based numbers of the items that fail.
    pub fn failing(&self) -> Vec<usize> {
        (0..7).filter(|&i| !self.items[i]).map(|i| i + 1).collect()
    }
}

/// Checks the key-region facts for the query `(e, s)` of `source` on a
/// region of any system containing the rectified gadget names (the union
/// or its joining). The region is normalized so that it contains `m0`;
/// `None` if it does not separate the key states.
///
/// 1. `R ∩ M = {m0, m2, m4}`;
/// 2. `R ∩ D_j = {d_j_1, d_j_3, d_j_5, d_j_7, d_j_8, d_j_10, d_j_12}`;
/// 3. `R ∩ P = {p_0, p_2, p_5, p_7}`;
/// 4. `e` and `e_0 … e_9` exit;
/// 5. `v_0 … v_11` enter;
/// 6. `h_1` enters and `h_2` exits;
/// 7. the copy's states restricted to the input form a region of the input
///    inhibiting `e` at `s`.
pub fn key_region_items(
    sys: &System,
    source: &TransitionSystem,
    e: &str,
    s: &str,
    region: &Region,
) -> Option<KeyRegionItems> {
    let prefix = rectify_prefix(e, s);
    let state = |n: &str| sys.state(&format!("{prefix}{n}"));
    let event = |n: &str| sys.event(&format!("{prefix}{n}"));
    let (m0, m1) = (state("m0")?, state("m1")?);
    if !region.separates(m0, m1) {
        return None;
    }
    let region = if region.contains(m0) {
        region.clone()
    } else {
        region.complement()
    };
    // Exactly `members` among the states `name(0), …, name(n - 1)`.
    let exact = |n: usize, members: &[usize], name: &dyn Fn(usize) -> String| {
        (0..n)
            .all(|i| state(&name(i)).is_some_and(|st| region.contains(st) == members.contains(&i)))
    };
    let sign_is = |n: &str, sign: Sign| event(n).is_some_and(|ev| region.sign(ev) == sign);

    let item1 = exact(6, &[0, 2, 4], &|i| format!("m{i}"));
    let item2 = (0..5).all(|j| exact(14, &[1, 3, 5, 7, 8, 10, 12], &|i| format!("d_{j}_{i}")));
    let item3 = exact(8, &[0, 2, 5, 7], &|i| format!("p_{i}"));
    let item4 = sign_is("e", Sign::Exit) && (0..10).all(|i| sign_is(&format!("e_{i}"), Sign::Exit));
    let item5 = (0..12).all(|i| sign_is(&format!("v_{i}"), Sign::Enter));
    let item6 = sign_is("h_1", Sign::Enter) && sign_is("h_2", Sign::Exit);
    let item7 = (|| {
        let mut bits = FixedBitSet::with_capacity(source.state_count());
        for x in source.states() {
            let copy = state(&format!("c.{}", source.state_name(x)))?;
            bits.set(x.index(), region.contains(copy));
        }
        let restricted = check_region(source, &bits)?;
        Some(restricted.inhibits(source.event(e)?, source.state(s)?))
    })()
    .unwrap_or(false);
    Some(KeyRegionItems {
        items: [item1, item2, item3, item4, item5, item6, item7],
    })
}
