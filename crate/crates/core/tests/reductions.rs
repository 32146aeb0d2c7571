//! End-to-end checks of the gadget constructions on small formulas.

mod common;

use regionsynth::io::{parse_ts, parse_union, serialize_ts, serialize_union};
use regionsynth::properties::inhibitable;
use regionsynth::reductions::{
    build_2grade2_essp, build_linear3_essp, decode_model_2grade2, decode_model_linear3,
    find_one_in_three_models, CubicMonotoneFormula, GadgetInstance, ReductionError,
};
use regionsynth::unions::TsUnion;

use common::{complete4, phi6};

/// Every cubic monotone formula on `m` variables whose clause list is a
/// lexicographically increasing selection of 3-subsets, capped at `cap`.
fn cubic_formulas(m: u32, cap: usize) -> Vec<CubicMonotoneFormula> {
    let mut triples = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                triples.push([a, b, c]);
            }
        }
    }
    fn pick(
        triples: &[[u32; 3]],
        from: usize,
        chosen: &mut Vec<[u32; 3]>,
        m: usize,
        out: &mut Vec<CubicMonotoneFormula>,
        cap: usize,
    ) {
        if out.len() >= cap {
            return;
        }
        if chosen.len() == m {
            if let Ok(f) = CubicMonotoneFormula::new(chosen.clone()) {
                out.push(f);
            }
            return;
        }
        for i in from..triples.len() {
            chosen.push(triples[i]);
            // Prune selections in which a variable is already over-used.
            let over = (0..m as u32).any(|v| chosen.iter().filter(|t| t.contains(&v)).count() > 3);
            if !over {
                pick(triples, i + 1, chosen, m, out, cap);
            }
            chosen.pop();
        }
    }
    let mut out = Vec::new();
    pick(&triples, 0, &mut Vec::new(), m as usize, &mut out, cap);
    out
}

fn small_formulas() -> Vec<CubicMonotoneFormula> {
    let mut all = vec![complete4(), phi6()];
    for m in 4..=6 {
        all.extend(cubic_formulas(m, 6));
    }
    all
}

#[test]
fn formula_enumeration_finds_all_shapes() {
    assert_eq!(cubic_formulas(4, usize::MAX).len(), 1);
    assert!(!cubic_formulas(5, usize::MAX).is_empty());
    assert!(cubic_formulas(6, 6).len() == 6);
}

#[test]
fn linear_instance_key_query_matches_models() {
    for f in small_formulas() {
        let expected = !find_one_in_three_models(&f).unwrap().is_empty();
        let inst = build_linear3_essp(&f).unwrap();
        let (k, s) = inst.key_inhibition().unwrap();
        let region = inhibitable(&inst.union, k, s).unwrap();
        assert_eq!(region.is_some(), expected, "{}", f.to_cnf3());
        if let Some(r) = region {
            let model = decode_model_linear3(&f, &inst.union, &r).expect("decodable");
            assert!(f.is_model(&model), "{} decoded {model}", f.to_cnf3());
        }
    }
}

#[test]
fn two_fold_instance_key_query_matches_models() {
    for f in small_formulas() {
        let expected = !find_one_in_three_models(&f).unwrap().is_empty();
        let inst = build_2grade2_essp(&f).unwrap();
        let (k, s) = inst.key_inhibition().unwrap();
        let region = inhibitable(&inst.union, k, s).unwrap();
        assert_eq!(region.is_some(), expected, "{}", f.to_cnf3());
        if let Some(r) = region {
            let model = decode_model_2grade2(&f, &inst.union, &r).expect("decodable");
            assert!(f.is_model(&model), "{} decoded {model}", f.to_cnf3());
        }
    }
}

#[test]
fn generated_instances_have_the_advertised_shape() {
    for f in [complete4(), phi6()] {
        let linear = build_linear3_essp(&f).unwrap().joined().unwrap();
        assert!(linear.validate().is_empty());
        let class = linear.classify();
        assert!(class.linear);
        assert_eq!(class.manifoldness, 3);

        let two = build_2grade2_essp(&f).unwrap();
        assert!(two.union.validate().is_empty());
        for i in 0..two.union.components().len() {
            let ts = two.union.component_ts(i);
            let c = ts.classify();
            assert!(c.manifoldness <= 2, "{}: {c:?}", ts.name());
            // The headmaster has three predecessors at each linked
            // final state; every other gadget is 2-grade.
            let bound = if ts.name() == "H" { 3 } else { 2 };
            assert!(c.degree <= bound, "{}: {c:?}", ts.name());
        }
        let joined = two.joined().unwrap();
        assert!(joined.validate().is_empty());
        assert_eq!(joined.classify().manifoldness, 2);
    }
}

#[test]
fn generated_instances_serialize_reproducibly() {
    type Build = fn(&CubicMonotoneFormula) -> Result<GadgetInstance, ReductionError>;
    let builders: [Build; 2] = [build_linear3_essp, build_2grade2_essp];
    for f in [complete4(), phi6()] {
        for build in builders {
            let inst = build(&f).unwrap();
            let again = build(&f).unwrap();
            let terminals = inst.join_plan.pairs(&inst.union);
            let text = serialize_union(&inst.union, &terminals);
            assert_eq!(
                text,
                serialize_union(&again.union, &again.join_plan.pairs(&again.union))
            );
            assert_eq!(inst.key_manifest(), again.key_manifest());

            let parsed = parse_union(&text, None).unwrap();
            assert_eq!(parsed.terminals, terminals);
            let rebuilt = TsUnion::new(parsed.components).unwrap();
            assert!(rebuilt.same_components(&inst.union));

            let joined = inst.joined().unwrap();
            let ts_text = serialize_ts(&joined);
            assert_eq!(ts_text, serialize_ts(&again.joined().unwrap()));
            let back = parse_ts(&ts_text).unwrap();
            assert_eq!(serialize_ts(&back), ts_text);
        }
    }
}
