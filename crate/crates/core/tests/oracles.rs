//! Property tests comparing the search-based deciders with brute-force
//! oracles on random systems.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regionsynth::corpus::{random_linear, random_ts};
use regionsynth::properties::{has_essp, has_ssp, inhibitable, separable, CheckOptions};
use regionsynth::regions::{
    aggregate_signature, check_region, enumerate_regions, solve_all_regions, Region,
    RegionConstraint,
};
use regionsynth::TransitionSystem;

fn system(seed: u64, states: usize, events: usize) -> TransitionSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_ts(&mut rng, states, events, states)
}

fn sorted(mut regions: Vec<Region>) -> Vec<Region> {
    regions.sort_by(Region::canonical_cmp);
    regions
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn solver_finds_exactly_the_enumerated_regions(
        seed in any::<u64>(), states in 1usize..=11, events in 1usize..=4,
    ) {
        let ts = system(seed, states, events);
        let brute = sorted(enumerate_regions(&ts, 16).unwrap());
        let searched = sorted(solve_all_regions(&ts, &RegionConstraint::new(&ts), usize::MAX));
        prop_assert_eq!(brute, searched);
    }

    #[test]
    fn separation_properties_match_the_region_list(
        seed in any::<u64>(), states in 1usize..=10, events in 1usize..=4,
    ) {
        let ts = system(seed, states, events);
        let all = enumerate_regions(&ts, 16).unwrap();
        let mut ssp = true;
        for s in ts.states() {
            for t in ts.states().filter(|&t| t > s) {
                let expected = all.iter().any(|r| r.separates(s, t));
                let found = separable(&ts, s, t).unwrap();
                prop_assert_eq!(found.is_some(), expected);
                if let Some(r) = found {
                    prop_assert!(r.separates(s, t));
                }
                ssp &= expected;
            }
        }
        let mut essp = true;
        for e in ts.events() {
            for s in ts.states().filter(|&s| !ts.occurs_at(e, s)) {
                let expected = all.iter().any(|r| r.inhibits(e, s));
                let found = inhibitable(&ts, e, s).unwrap();
                prop_assert_eq!(found.is_some(), expected);
                if let Some(r) = found {
                    prop_assert!(r.inhibits(e, s));
                }
                essp &= expected;
            }
        }
        prop_assert_eq!(has_ssp(&ts, CheckOptions::default()).unwrap().holds, ssp);
        prop_assert_eq!(has_essp(&ts, CheckOptions::default()).unwrap().holds, essp);
    }

    #[test]
    fn regions_are_closed_under_complement(
        seed in any::<u64>(), states in 1usize..=10, events in 1usize..=4,
    ) {
        let ts = system(seed, states, events);
        for r in enumerate_regions(&ts, 16).unwrap() {
            let c = r.complement();
            prop_assert_eq!(check_region(&ts, c.members()), Some(c.clone()));
            for e in ts.events() {
                prop_assert_eq!(c.sign(e), r.sign(e).negate());
            }
        }
    }

    #[test]
    fn aggregate_signature_is_a_membership_difference(
        seed in any::<u64>(), states in 2usize..=10, fold in 1usize..=3,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ts = random_linear(&mut rng, states, fold);
        let chain = ts.linear_chain().unwrap();
        for r in enumerate_regions(&ts, 16).unwrap() {
            for i in 0..chain.states.len() {
                for j in i..chain.states.len() {
                    let sum = aggregate_signature(&r, &ts, i, j).unwrap();
                    prop_assert!((-1..=1).contains(&sum));
                    prop_assert_eq!(sum, r.value(chain.states[j]) - r.value(chain.states[i]));
                }
            }
        }
    }
}

#[test]
fn fixed_corpus_matches_brute_force() {
    for ts in common::mixed_corpus()
        .into_iter()
        .filter(|ts| ts.state_count() <= 12)
    {
        let brute = sorted(enumerate_regions(&ts, 16).unwrap());
        let searched = sorted(solve_all_regions(
            &ts,
            &RegionConstraint::new(&ts),
            usize::MAX,
        ));
        assert_eq!(brute, searched, "{}", ts.name());
    }
}
