//! Deciders for state separation (SSP), event/state separation (ESSP) and
//! feasibility, with witness regions.
//!
//! For a system with several components, state pairs from different
//! components are separated by definition and never queried; every event
//! is queried at every state of every component that lacks it.

use std::time::Instant;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::regions::{check_region, Region, RegionConstraint, RegionSolver, Timeout};
use crate::ts::{EventId, StateId, System};

/// One separation problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Query {
    /// Distinguish two states of the same component.
    States(StateId, StateId),
    /// Inhibit an event at a state lacking it.
    EventState(EventId, StateId),
}

impl Query {
    /// Whether `region` answers the query.
    pub fn answered_by(&self, region: &Region) -> bool {
        match *self {
            Query::States(s, t) => region.separates(s, t),
            Query::EventState(e, s) => region.inhibits(e, s),
        }
    }

    pub fn describe(&self, sys: &System) -> String {
        match *self {
            Query::States(s, t) => format!("({}, {})", sys.state_name(s), sys.state_name(t)),
            Query::EventState(e, s) => format!("({}, {})", sys.event_name(e), sys.state_name(s)),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PropertyError {
    #[error("a state cannot be separated from itself")]
    SameState,
    #[error("states `{0}` and `{1}` belong to different components")]
    DifferentComponents(String, String),
    #[error("`{event}` occurs at `{state}`; the inhibition query is vacuous")]
    EventOccurs { event: String, state: String },
    #[error("region #{0} of the witness set is not a region of the system")]
    InvalidRegion(usize),
    #[error("deadline exceeded after {checked} queries")]
    Timeout { checked: usize },
}

/// Knobs for the whole-system checks.
#[derive(Clone, Copy, Debug, Default)]
pub struct CheckOptions {
    /// Keep going after the first failing query and report all of them.
    pub exhaustive: bool,
    pub deadline: Option<Instant>,
}

impl CheckOptions {
    pub fn exhaustive() -> Self {
        CheckOptions {
            exhaustive: true,
            deadline: None,
        }
    }
}

/// Outcome of a whole-system check.
#[derive(Clone, Debug, Default)]
pub struct Verdict {
    pub holds: bool,
    /// Witness regions in discovery order; together they answer every
    /// query that was answered.
    pub regions: Vec<Region>,
    /// The first failing query, in query order.
    pub counterexample: Option<Query>,
    /// All failing queries (only the first unless exhaustive).
    pub failures: Vec<Query>,
    /// Number of queries examined.
    pub checked: usize,
}

impl Verdict {
    /// A witness region answering `query`, if the verdict has one.
    pub fn witness(&self, query: &Query) -> Option<&Region> {
        self.regions.iter().find(|r| query.answered_by(r))
    }

    fn fail(&mut self, q: Query) {
        self.holds = false;
        self.counterexample.get_or_insert(q);
        self.failures.push(q);
    }
}

/// A region with `R(s) = 1` and `R(t) = 0`, if any region separates them.
pub fn separable(sys: &System, s: StateId, t: StateId) -> Result<Option<Region>, PropertyError> {
    check_pair(sys, s, t)?;
    let constraint = RegionConstraint::separate(sys, s, t).expect("ids come from the system");
    Ok(RegionSolver::new(sys)
        .solve(&constraint)
        .expect("no deadline"))
}

fn check_pair(sys: &System, s: StateId, t: StateId) -> Result<(), PropertyError> {
    if s == t {
        return Err(PropertyError::SameState);
    }
    if sys.component_of(s) != sys.component_of(t) {
        return Err(PropertyError::DifferentComponents(
            sys.state_name(s).to_string(),
            sys.state_name(t).to_string(),
        ));
    }
    Ok(())
}

/// A region with `sig(e) = −1` and `R(s) = 0`, if `e` is inhibitable at `s`.
/// The complementary polarity is covered by complementation.
pub fn inhibitable(sys: &System, e: EventId, s: StateId) -> Result<Option<Region>, PropertyError> {
    check_inhibition(sys, e, s)?;
    let constraint = RegionConstraint::inhibit(sys, e, s).expect("ids come from the system");
    Ok(RegionSolver::new(sys)
        .solve(&constraint)
        .expect("no deadline"))
}

fn check_inhibition(sys: &System, e: EventId, s: StateId) -> Result<(), PropertyError> {
    if sys.occurs_at(e, s) {
        return Err(PropertyError::EventOccurs {
            event: sys.event_name(e).to_string(),
            state: sys.state_name(s).to_string(),
        });
    }
    Ok(())
}

/// Tracks which state pairs the known regions already separate, as the
/// partition of each component induced by the regions' memberships.
struct SeparationCache {
    block: Vec<u32>,
    blocks: u32,
}

impl SeparationCache {
    fn new(sys: &System) -> Self {
        SeparationCache {
            block: (0..sys.state_count())
                .map(|s| sys.component_of(StateId(s as u32)) as u32)
                .collect(),
            blocks: sys.components().len() as u32,
        }
    }

    fn separated(&self, s: StateId, t: StateId) -> bool {
        self.block[s.index()] != self.block[t.index()]
    }

    fn add(&mut self, region: &Region) {
        let mut split = vec![u32::MAX; self.blocks as usize];
        for (s, b) in self.block.iter_mut().enumerate() {
            if region.members().contains(s) {
                if split[*b as usize] == u32::MAX {
                    split[*b as usize] = self.blocks;
                    self.blocks += 1;
                }
                *b = split[*b as usize];
            }
        }
    }
}

/// Per-event sets of states at which the known regions inhibit the event.
struct InhibitionCache {
    inhibited: Vec<FixedBitSet>,
}

impl InhibitionCache {
    fn new(sys: &System) -> Self {
        InhibitionCache {
            inhibited: vec![FixedBitSet::with_capacity(sys.state_count()); sys.event_count()],
        }
    }

    fn inhibited(&self, e: EventId, s: StateId) -> bool {
        self.inhibited[e.index()].contains(s.index())
    }

    fn add(&mut self, region: &Region) {
        for e in region.exits() {
            let mut outside = region.members().clone();
            outside.toggle_range(..);
            self.inhibited[e.index()].union_with(&outside);
        }
        for e in region.enters() {
            self.inhibited[e.index()].union_with(region.members());
        }
    }
}

fn solver_for<'a>(sys: &'a System, options: &CheckOptions) -> RegionSolver<'a> {
    let mut solver = RegionSolver::new(sys);
    solver.set_deadline(options.deadline);
    solver
}

fn timeout(verdict: &Verdict) -> impl Fn(Timeout) -> PropertyError + '_ {
    move |_| PropertyError::Timeout {
        checked: verdict.checked,
    }
}

/// Decides the SSP over all intra-component state pairs.
pub fn has_ssp(sys: &System, options: CheckOptions) -> Result<Verdict, PropertyError> {
    has_ssp_seeded(sys, options, Vec::new())
}

fn has_ssp_seeded(
    sys: &System,
    options: CheckOptions,
    seed: Vec<Region>,
) -> Result<Verdict, PropertyError> {
    let mut solver = solver_for(sys, &options);
    let mut cache = SeparationCache::new(sys);
    for r in &seed {
        cache.add(r);
    }
    let mut verdict = Verdict {
        holds: true,
        regions: seed,
        ..Verdict::default()
    };
    for comp in sys.components() {
        let states: Vec<StateId> = comp.states().collect();
        for (i, &s) in states.iter().enumerate() {
            // Farthest partner first: distant pairs tend to need fresh regions,
            // and the regions found for them separate many nearer pairs.
            for &t in states[i + 1..].iter().rev() {
                verdict.checked += 1;
                if cache.separated(s, t) {
                    continue;
                }
                let constraint =
                    RegionConstraint::separate(sys, s, t).expect("ids come from the system");
                match solver.solve(&constraint).map_err(timeout(&verdict))? {
                    Some(region) => {
                        cache.add(&region);
                        verdict.regions.push(region);
                    }
                    None => {
                        verdict.fail(Query::States(s, t));
                        if !options.exhaustive {
                            return Ok(verdict);
                        }
                    }
                }
            }
        }
    }
    Ok(verdict)
}

/// Decides the ESSP over all non-vacuous event/state pairs, events outer.
pub fn has_essp(sys: &System, options: CheckOptions) -> Result<Verdict, PropertyError> {
    let mut solver = solver_for(sys, &options);
    let mut cache = InhibitionCache::new(sys);
    let mut verdict = Verdict {
        holds: true,
        ..Verdict::default()
    };
    for e in sys.events() {
        for s in sys.states() {
            if sys.occurs_at(e, s) {
                continue;
            }
            verdict.checked += 1;
            if cache.inhibited(e, s) {
                continue;
            }
            let constraint =
                RegionConstraint::inhibit(sys, e, s).expect("ids come from the system");
            match solver.solve(&constraint).map_err(timeout(&verdict))? {
                Some(region) => {
                    cache.add(&region);
                    verdict.regions.push(region);
                }
                None => {
                    verdict.fail(Query::EventState(e, s));
                    if !options.exhaustive {
                        return Ok(verdict);
                    }
                }
            }
        }
    }
    Ok(verdict)
}

/// Feasibility: the ESSP, then the SSP (reusing the ESSP witnesses).
pub fn is_feasible(sys: &System, options: CheckOptions) -> Result<Verdict, PropertyError> {
    let essp = has_essp(sys, options)?;
    if !essp.holds && !options.exhaustive {
        return Ok(essp);
    }
    let ssp = has_ssp_seeded(sys, options, essp.regions.clone())?;
    let mut failures = essp.failures;
    failures.extend(ssp.failures);
    Ok(Verdict {
        holds: essp.holds && ssp.holds,
        regions: ssp.regions,
        counterexample: failures.first().copied(),
        failures,
        checked: essp.checked + ssp.checked,
    })
}

fn validate_witnesses(sys: &System, regions: &[Region]) -> Result<(), PropertyError> {
    for (i, r) in regions.iter().enumerate() {
        if r.members().len() != sys.state_count() || r.signature().len() != sys.event_count() {
            return Err(PropertyError::InvalidRegion(i));
        }
        if check_region(sys, r.members()).as_ref() != Some(r) {
            return Err(PropertyError::InvalidRegion(i));
        }
    }
    Ok(())
}

/// Whether `regions` separate every intra-component state pair.
pub fn is_ssp_witness(sys: &System, regions: &[Region]) -> Result<bool, PropertyError> {
    validate_witnesses(sys, regions)?;
    let mut cache = SeparationCache::new(sys);
    for r in regions {
        cache.add(r);
    }
    Ok(sys.components().iter().all(|comp| {
        let states: Vec<StateId> = comp.states().collect();
        states
            .iter()
            .enumerate()
            .all(|(i, &s)| states[i + 1..].iter().all(|&t| cache.separated(s, t)))
    }))
}

/// Whether `regions` inhibit every event at every state lacking it.
pub fn is_essp_witness(sys: &System, regions: &[Region]) -> Result<bool, PropertyError> {
    validate_witnesses(sys, regions)?;
    let mut cache = InhibitionCache::new(sys);
    for r in regions {
        cache.add(r);
    }
    Ok(sys.events().all(|e| {
        sys.states()
            .all(|s| sys.occurs_at(e, s) || cache.inhibited(e, s))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::enumerate_regions;
    use crate::ts::linear_ts;

    #[test]
    fn single_edge_is_feasible() {
        let ts = linear_ts("s", &["a"]);
        let v = is_feasible(&ts, CheckOptions::default()).unwrap();
        assert!(v.holds);
        assert!(is_ssp_witness(&ts, &v.regions).unwrap());
        assert!(is_essp_witness(&ts, &v.regions).unwrap());
        let q = Query::EventState(ts.event("a").unwrap(), ts.state("s1").unwrap());
        assert!(v.witness(&q).is_some());
    }

    #[test]
    fn abab_lacks_ssp() {
        let ts = linear_ts("s", &["a", "b", "a", "b"]);
        let v = has_ssp(&ts, CheckOptions::default()).unwrap();
        assert!(!v.holds);
        assert_eq!(
            v.counterexample,
            Some(Query::States(
                ts.state("s0").unwrap(),
                ts.state("s4").unwrap()
            ))
        );
        assert_eq!(
            separable(&ts, ts.state("s0").unwrap(), ts.state("s4").unwrap()),
            Ok(None)
        );
    }

    #[test]
    fn contract_errors() {
        let ts = linear_ts("s", &["a", "b"]);
        let s0 = ts.state("s0").unwrap();
        assert_eq!(separable(&ts, s0, s0), Err(PropertyError::SameState));
        assert!(matches!(
            inhibitable(&ts, ts.event("a").unwrap(), s0),
            Err(PropertyError::EventOccurs { .. })
        ));
    }

    #[test]
    fn inhibition_example() {
        let ts = linear_ts("s", &["a", "b"]);
        let (a, s2) = (ts.event("a").unwrap(), ts.state("s2").unwrap());
        let r = inhibitable(&ts, a, s2).unwrap().unwrap();
        assert!(r.inhibits(a, s2));
    }

    #[test]
    fn witness_checks() {
        let ts = linear_ts("s", &["a", "b", "a"]);
        let all = enumerate_regions(&ts, 22).unwrap();
        assert!(is_essp_witness(&ts, &all).unwrap());
        assert!(is_ssp_witness(&ts, &all).unwrap());
        assert!(!is_ssp_witness(&ts, &[]).unwrap());
        let other = linear_ts("t", &["a"]);
        let foreign = enumerate_regions(&other, 22).unwrap();
        assert_eq!(
            is_ssp_witness(&ts, &foreign[1..2]),
            Err(PropertyError::InvalidRegion(0))
        );
    }

    #[test]
    fn exhaustive_reports_every_failure() {
        let ts = linear_ts("s", &["a", "b", "a", "b"]);
        let v = has_ssp(&ts, CheckOptions::exhaustive()).unwrap();
        assert!(!v.holds);
        assert!(!v.failures.is_empty());
        assert_eq!(v.counterexample, v.failures.first().copied());
        assert_eq!(v.checked, 10);
    }

    #[test]
    fn expired_deadline_times_out() {
        let ts = linear_ts("s", &["a", "b", "c", "a", "b", "c"]);
        let options = CheckOptions {
            exhaustive: false,
            deadline: Some(Instant::now()),
        };
        assert_eq!(
            has_essp(&ts, options).unwrap_err(),
            PropertyError::Timeout { checked: 1 }
        );
    }
}
