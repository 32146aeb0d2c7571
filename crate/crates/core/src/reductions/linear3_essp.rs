//! One-in-three 3-SAT as inhibition of a key event in a linear 3-fold union.
//!
//! The basic union `B` consists of the master `M` (key event `k`, key state
//! `m6`), refreshers `F_j` and duplicators `D_j` for `j < 6m`. Inhibiting
//! `k` at `m6` forces a unique region on `B` in which every key copy
//! `k_i` exits. Each clause `K_i = {X_a, X_b, X_c}` (`a < b < c`) adds a
//! translator `T_i = U(T_i_0, T_i_1, T_i_2)` over the free key copies
//! `k_{18i+2+3l}`; with exiting key copies exactly one of the clause's
//! variable events enters.

use crate::regions::{Region, Sign};
use crate::ts::{RawComponent, System};
use crate::unions::{JoinPlan, TsUnion};

use super::formula::{CubicMonotoneFormula, OneInThreeModel};
use super::{
    chain, numbered, region_of_names, Construction, GadgetInstance, KeyQuery, Provenance,
    ReductionError,
};

/// Which variable of a clause enters in a translator region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TranslatorChoice {
    A,
    B,
    C,
}

impl TranslatorChoice {
    pub const ALL: [TranslatorChoice; 3] = [
        TranslatorChoice::A,
        TranslatorChoice::B,
        TranslatorChoice::C,
    ];

    /// Position of the chosen variable in the sorted clause.
    pub fn position(self) -> usize {
        match self {
            TranslatorChoice::A => 0,
            TranslatorChoice::B => 1,
            TranslatorChoice::C => 2,
        }
    }
}

fn k(i: usize) -> String {
    format!("k_{i}")
}

fn z(i: usize) -> String {
    format!("z_{i}")
}

fn o(i: usize) -> String {
    format!("o_{i}")
}

fn master() -> RawComponent {
    chain(
        "M",
        &numbered("m", 9),
        &["k", "z_0", "o_0", "k", "h", "z_0", "o_1", "k"],
    )
}

fn refresher(j: usize) -> RawComponent {
    chain(
        format!("F_{j}"),
        &numbered(&format!("f_{j}_"), 8),
        &[
            o(2 * j),
            k(3 * j),
            o(2 * j + 1),
            k(3 * j + 1),
            o(2 * j),
            k(3 * j + 2),
            o(2 * j + 1),
        ],
    )
}

fn duplicator(j: usize) -> RawComponent {
    let h = format!("h_{j}");
    chain(
        format!("D_{j}"),
        &numbered(&format!("d_{j}_"), 15),
        &[
            k(3 * j),
            z(2 * j),
            h.clone(),
            k(3 * j),
            z(2 * j + 1),
            h,
            z(2 * j + 2),
            k(3 * j + 1),
            z(2 * j + 1),
            o(2 * j + 2),
            k(3 * j + 1),
            z(2 * j + 2),
            o(2 * j + 3),
            k(3 * j + 2),
        ],
    )
}

fn basic_components(m: usize) -> Vec<RawComponent> {
    let mut comps = vec![master()];
    comps.extend((0..6 * m).map(refresher));
    comps.extend((0..6 * m).map(duplicator));
    comps
}

/// The three components of the translator for clause `i`. `var(v)` names
/// the event of variable `v`, `tilde` the copy of the middle variable and
/// `proxy` the proxy event.
pub(super) fn translator_components(
    i: usize,
    clause: [u32; 3],
    var: impl Fn(u32) -> String,
    tilde: &str,
    proxy: &str,
) -> Vec<RawComponent> {
    let key = |l: usize| k(18 * i + 2 + 3 * l);
    let [a, b, c] = clause;
    vec![
        chain(
            format!("T_{i}_0"),
            &numbered(&format!("t_{i}_0_"), 6),
            &[key(0), var(a), tilde.to_string(), var(c), key(3)],
        ),
        chain(
            format!("T_{i}_1"),
            &numbered(&format!("t_{i}_1_"), 5),
            &[key(1), var(b), proxy.to_string(), key(4)],
        ),
        chain(
            format!("T_{i}_2"),
            &numbered(&format!("t_{i}_2_"), 5),
            &[key(2), tilde.to_string(), proxy.to_string(), key(5)],
        ),
    ]
}

/// Members of the translator region for clause `i` and the given choice.
pub(super) fn translator_template_states(i: usize, choice: TranslatorChoice) -> Vec<String> {
    let t = |l: usize, s: usize| format!("t_{i}_{l}_{s}");
    let mut states = vec![t(0, 0), t(0, 4), t(1, 0), t(1, 3), t(2, 0), t(2, 3)];
    match choice {
        TranslatorChoice::C => {}
        TranslatorChoice::B => states.extend([t(0, 3), t(1, 2), t(2, 2)]),
        TranslatorChoice::A => states.extend([t(0, 2), t(0, 3)]),
    }
    states
}

fn variable(v: u32) -> String {
    format!("X_{v}")
}

fn translator(formula: &CubicMonotoneFormula, i: usize) -> Vec<RawComponent> {
    let clause = formula.clauses()[i];
    translator_components(
        i,
        clause,
        variable,
        &format!("Xt_{i}_{}", clause[1]),
        &format!("p_{i}"),
    )
}

/// The basic union `B = U(M, F_0, …, F_{6m-1}, D_0, …, D_{6m-1})`.
pub fn basic_union_linear3(m: usize) -> TsUnion {
    TsUnion::from_raw(basic_components(m)).expect("basic gadgets are well formed")
}

fn basic_key_states(m: usize) -> Vec<String> {
    let mut states: Vec<String> = ["m0", "m3", "m7"].iter().map(|s| s.to_string()).collect();
    for j in 0..6 * m {
        states.extend([1, 3, 5, 7].map(|s| format!("f_{j}_{s}")));
        states.extend([0, 3, 6, 7, 10, 13].map(|s| format!("d_{j}_{s}")));
    }
    states
}

/// The region `R^B` of `B` inhibiting `k` at `m6` with exiting key copies.
pub fn basic_key_region_linear3(m: usize) -> Region {
    region_of_names(&basic_union_linear3(m), &basic_key_states(m)).expect("R^B is a region")
}

/// The translator union `T_i` alone.
pub fn translator_union_linear3(formula: &CubicMonotoneFormula, i: usize) -> TsUnion {
    TsUnion::from_raw(translator(formula, i)).expect("translator gadgets are well formed")
}

/// `R^{T_i}_a`, `R^{T_i}_b` or `R^{T_i}_c` as a region of `T_i`.
pub fn translator_template_linear3(
    formula: &CubicMonotoneFormula,
    i: usize,
    choice: TranslatorChoice,
) -> Region {
    region_of_names(
        &translator_union_linear3(formula, i),
        &translator_template_states(i, choice),
    )
    .expect("translator templates are regions")
}

/// `U^φ = U(B, T_0, …, T_{m-1})` with key query `(k, m6)`. Accepts
/// scaffolding formulas; the joined system is linear and 3-fold.
pub fn build_linear3_essp(
    formula: &CubicMonotoneFormula,
) -> Result<GadgetInstance, ReductionError> {
    let m = formula.m();
    let mut comps = basic_components(m);
    for i in 0..m {
        comps.extend(translator(formula, i));
    }
    let union = TsUnion::from_raw(comps)?;
    let join_plan = JoinPlan::defaults(&union);
    Ok(GadgetInstance {
        union,
        key_query: KeyQuery::Inhibit {
            event: "k".to_string(),
            state: "m6".to_string(),
        },
        join_plan,
        provenance: Provenance {
            construction: Construction::Linear3Essp,
            source: formula.to_cnf3(),
        },
    })
}

/// `R^B ∪ R^T` for a model: a region of `build_linear3_essp(formula).union`
/// inhibiting `k` at `m6`, where each translator takes the template of the
/// clause variable the model selects.
pub fn build_key_region_linear3(
    formula: &CubicMonotoneFormula,
    model: &OneInThreeModel,
) -> Result<Region, ReductionError> {
    if !formula.is_model(model) {
        return Err(ReductionError::NotModel);
    }
    let instance = build_linear3_essp(formula)?;
    let mut states = basic_key_states(formula.m());
    for (i, clause) in formula.clauses().iter().enumerate() {
        let pos = clause.iter().position(|&v| model.contains(v)).unwrap();
        let choice = TranslatorChoice::ALL[pos];
        states.extend(translator_template_states(i, choice));
    }
    Ok(region_of_names(&instance.union, &states).expect("key region template is a region"))
}

/// Reads the model off a key region: the variables whose events move in
/// the direction opposite to `k`.
pub fn decode_model_linear3(
    formula: &CubicMonotoneFormula,
    sys: &System,
    region: &Region,
) -> Option<OneInThreeModel> {
    let key = sys.event("k")?;
    let wanted = region.sign(key).negate();
    if wanted == Sign::Obey {
        return None;
    }
    let mut vars = Vec::new();
    for v in 0..formula.variable_count() as u32 {
        if let Some(e) = sys.event(&variable(v)) {
            if region.sign(e) == wanted {
                vars.push(v);
            }
        }
    }
    Some(OneInThreeModel::new(vars))
}
