//! Fixtures shared by the integration tests and the acceptance suite.

#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regionsynth::corpus::{linear_corpus, random_ts};
use regionsynth::reductions::CubicMonotoneFormula;
use regionsynth::TransitionSystem;

/// The six-clause formula `{0,1,2} {0,1,3} {0,2,3} {1,4,5} {2,4,5}
/// {3,4,5}`, with the one-in-three model `{X0, X4}`.
pub fn phi6() -> CubicMonotoneFormula {
    CubicMonotoneFormula::new(vec![
        [0, 1, 2],
        [0, 1, 3],
        [0, 2, 3],
        [1, 4, 5],
        [2, 4, 5],
        [3, 4, 5],
    ])
    .unwrap()
}

/// All four 3-subsets of four variables: cubic, and without a model since
/// `3|M| = 4` has no solution.
pub fn complete4() -> CubicMonotoneFormula {
    CubicMonotoneFormula::new(vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]).unwrap()
}

/// The m = 1 scaffolding formula used to build the basic union alone.
pub fn scaffolding() -> CubicMonotoneFormula {
    CubicMonotoneFormula::new_unchecked(vec![[0, 1, 2]]).unwrap()
}

/// Every linear 3-fold word of length at most 5, up to event renaming
/// (68 systems with 2 to 6 states).
pub fn linear3_corpus() -> Vec<TransitionSystem> {
    linear_corpus(5, 3)
}

/// Seeded random admissible systems with 1 to `max_states` states.
pub fn general_corpus(seed: u64, count: usize, max_states: usize) -> Vec<TransitionSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = 1 + i % max_states;
            let events = 1 + i % 4;
            random_ts(&mut rng, n, events, n)
        })
        .collect()
}

/// The corpus used by the oracle and synthesis checks: the linear words
/// plus seeded general systems of up to 14 states.
pub fn mixed_corpus() -> Vec<TransitionSystem> {
    let mut all = linear3_corpus();
    all.extend(general_corpus(7, 140, 14));
    all
}
