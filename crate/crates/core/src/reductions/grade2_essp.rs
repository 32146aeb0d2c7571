//! One-in-three 3-SAT as inhibition of a key event in a 2-fold union.
//!
//! The headmaster `H` (key event `k`, key state `h_0_8`) is a production
//! line of `14m` modules `H_j` linked by reachability events `r_j` and
//! accordance events `a_j`. With the duplicators `D_j` it turns an
//! inhibition of `k` at `h_0_8` into `14m` exiting free key copies
//! `k_{3j+2}`. Barters `B_q` trade two of them for an obeying consistency
//! event `c_q`; the variable manifolder `X_i` uses four consistency events
//! to give the three representers `X.α.i`, `X.β.i`, `X.γ.i` of variable
//! `i` (one per clause containing it) equal signatures; translators work as
//! in the linear construction over the representers.

use crate::regions::{Region, Sign};
use crate::ts::{RawComponent, System};
use crate::unions::{JoinPlan, TsUnion};

use super::formula::{CubicMonotoneFormula, OneInThreeModel};
use super::linear3_essp::{translator_components, translator_template_states, TranslatorChoice};
use super::{
    component, numbered, region_of_names, Construction, GadgetInstance, KeyQuery, Provenance,
    ReductionError,
};

fn k(i: usize) -> String {
    format!("k_{i}")
}

fn edge(s: String, e: String, t: String) -> (String, String, String) {
    (s, e, t)
}

fn headmaster(m: usize) -> RawComponent {
    let n = 14 * m;
    let h = |j: usize, s: usize| format!("h_{j}_{s}");
    let mut states = Vec::with_capacity(9 * n);
    let mut edges = Vec::new();
    for j in 0..n {
        states.extend((0..9).map(|s| h(j, s)));
        let (first, second) = if j == 0 {
            ("k".to_string(), "k".to_string())
        } else {
            (k(3 * j - 3), k(3 * j - 2))
        };
        let (z0, z1) = (format!("z_{}", 2 * j), format!("z_{}", 2 * j + 1));
        let (v0, v1) = (format!("v_{}", 2 * j), format!("v_{}", 2 * j + 1));
        let (w0, w1) = (format!("w_{}", 2 * j), format!("w_{}", 2 * j + 1));
        edges.extend([
            edge(h(j, 0), first, h(j, 1)),
            edge(h(j, 1), z0.clone(), h(j, 2)),
            edge(h(j, 2), v0, h(j, 4)),
            edge(h(j, 1), z1.clone(), h(j, 3)),
            edge(h(j, 3), v1, h(j, 4)),
            edge(h(j, 4), second, h(j, 5)),
            edge(h(j, 5), w0, h(j, 6)),
            edge(h(j, 6), z0, h(j, 8)),
            edge(h(j, 5), w1, h(j, 7)),
            edge(h(j, 7), z1, h(j, 8)),
        ]);
        if j + 1 < n {
            edges.push(edge(h(j, 0), format!("r_{j}"), h(j + 1, 0)));
            edges.push(edge(h(j, 8), format!("a_{j}"), h(j + 1, 8)));
        }
    }
    component("H", &states, edges)
}

fn duplicator(j: usize) -> RawComponent {
    let d = |s: usize| format!("d_{j}_{s}");
    component(
        format!("D_{j}"),
        &numbered(&format!("d_{j}_"), 5),
        vec![
            edge(d(0), k(3 * j + 1), d(1)),
            edge(d(1), format!("v_{}", 2 * j), d(2)),
            edge(d(2), k(3 * j), d(3)),
            edge(d(3), format!("v_{}", 2 * j + 1), d(4)),
            edge(d(4), format!("w_{}", 2 * j), d(0)),
            edge(d(4), k(3 * j + 2), d(1)),
            edge(d(1), format!("a_{j}"), d(3)),
        ],
    )
}

/// Key copy indices traded by barter `q`.
pub fn barter_keys(m: usize, q: usize) -> (usize, usize) {
    let q1 = 6 * q + 18 * m + 2;
    (q1, q1 + 3)
}

fn barter(m: usize, q: usize) -> RawComponent {
    let b = |s: usize| format!("b_{q}_{s}");
    let (q1, q2) = barter_keys(m, q);
    component(
        format!("B_{q}"),
        &numbered(&format!("b_{q}_"), 4),
        vec![
            edge(b(0), k(q1), b(1)),
            edge(b(0), format!("c_{q}"), b(2)),
            edge(b(2), k(q2), b(3)),
        ],
    )
}

/// The representer of variable `v` in clause `i`.
fn representer(i: usize, v: u32) -> String {
    format!("X.{i}.{v}")
}

fn manifolder(formula: &CubicMonotoneFormula, i: usize) -> RawComponent {
    let x = |s: usize| format!("x_{i}_{s}");
    let c = |l: usize| format!("c_{}", 4 * i + l);
    let mut edges = vec![
        edge(x(0), c(0), x(1)),
        edge(x(1), c(1), x(2)),
        edge(x(3), c(2), x(4)),
        edge(x(4), c(3), x(5)),
    ];
    for (row, clause) in formula.clauses_of(i as u32).into_iter().enumerate() {
        edges.push(edge(x(row), representer(clause, i as u32), x(row + 3)));
    }
    component(format!("X_{i}"), &numbered(&format!("x_{i}_"), 6), edges)
}

fn translator(formula: &CubicMonotoneFormula, i: usize) -> Vec<RawComponent> {
    let clause = formula.clauses()[i];
    translator_components(
        i,
        clause,
        |v| representer(i, v),
        &format!("Xt.{i}.{}", clause[1]),
        &format!("p_{i}"),
    )
}

/// The translator union `T_i` of this construction alone.
pub fn translator_union_2grade2(formula: &CubicMonotoneFormula, i: usize) -> TsUnion {
    TsUnion::from_raw(translator(formula, i)).expect("translator gadgets are well formed")
}

/// `U^φ = U(H, D_0, …, D_{14m-1}, B_0, …, B_{4m-1}, X_0, …, X_{m-1}, T_0,
/// …, T_{m-1})` with key query `(k, h_0_8)`. Requires a validated formula.
pub fn build_2grade2_essp(
    formula: &CubicMonotoneFormula,
) -> Result<GadgetInstance, ReductionError> {
    if !formula.is_checked() {
        return Err(ReductionError::Unchecked);
    }
    let m = formula.m();
    let mut comps = vec![headmaster(m)];
    comps.extend((0..14 * m).map(duplicator));
    comps.extend((0..4 * m).map(|q| barter(m, q)));
    comps.extend((0..m).map(|i| manifolder(formula, i)));
    for i in 0..m {
        comps.extend(translator(formula, i));
    }
    let mut terminals = vec![("H".to_string(), "h_0_8".to_string())];
    terminals.extend((0..14 * m).map(|j| (format!("D_{j}"), format!("d_{j}_0"))));
    terminals.extend((0..4 * m).map(|q| (format!("B_{q}"), format!("b_{q}_1"))));
    terminals.extend((0..m).map(|i| (format!("X_{i}"), format!("x_{i}_5"))));
    for i in 0..m {
        terminals.push((format!("T_{i}_0"), format!("t_{i}_0_5")));
        terminals.push((format!("T_{i}_1"), format!("t_{i}_1_4")));
        terminals.push((format!("T_{i}_2"), format!("t_{i}_2_4")));
    }
    let union = TsUnion::from_raw(comps)?;
    let join_plan = JoinPlan::with_terminals(&union, &terminals)?;
    Ok(GadgetInstance {
        union,
        key_query: KeyQuery::Inhibit {
            event: "k".to_string(),
            state: "h_0_8".to_string(),
        },
        join_plan,
        provenance: Provenance {
            construction: Construction::TwoGrade2Essp,
            source: formula.to_cnf3(),
        },
    })
}

/// The key region assembled from a model: a region of
/// `build_2grade2_essp(formula).union` inhibiting `k` at `h_0_8`.
pub fn build_key_region_2grade2(
    formula: &CubicMonotoneFormula,
    model: &OneInThreeModel,
) -> Result<Region, ReductionError> {
    if !formula.is_model(model) {
        return Err(ReductionError::NotModel);
    }
    let instance = build_2grade2_essp(formula)?;
    let m = formula.m();
    let mut states = Vec::new();
    for j in 0..14 * m {
        states.extend([0, 4].map(|s| format!("h_{j}_{s}")));
        states.extend([0, 2, 4].map(|s| format!("d_{j}_{s}")));
    }
    for q in 0..4 * m {
        states.extend([0, 2].map(|s| format!("b_{q}_{s}")));
    }
    for i in 0..m {
        states.extend([3, 4, 5].map(|s| format!("x_{i}_{s}")));
        if !model.contains(i as u32) {
            states.extend([0, 1, 2].map(|s| format!("x_{i}_{s}")));
        }
    }
    for (i, clause) in formula.clauses().iter().enumerate() {
        let pos = clause.iter().position(|&v| model.contains(v)).unwrap();
        states.extend(translator_template_states(i, TranslatorChoice::ALL[pos]));
    }
    Ok(region_of_names(&instance.union, &states).expect("key region template is a region"))
}

/// Reads the model off a key region: variables whose first representer
/// moves opposite to `k`.
pub fn decode_model_2grade2(
    formula: &CubicMonotoneFormula,
    sys: &System,
    region: &Region,
) -> Option<OneInThreeModel> {
    let wanted = region.sign(sys.event("k")?).negate();
    if wanted == Sign::Obey {
        return None;
    }
    let mut vars = Vec::new();
    for v in 0..formula.variable_count() as u32 {
        let first = *formula.clauses_of(v).first()?;
        if region.sign(sys.event(&representer(first, v))?) == wanted {
            vars.push(v);
        }
    }
    Some(OneInThreeModel::new(vars))
}
