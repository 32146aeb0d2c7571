//! Region-based synthesis of elementary net systems from transition systems.
//!
//! The crate decides the state separation property (SSP), the event/state
//! separation property (ESSP) and feasibility of labelled transition systems,
//! producing witness regions; synthesizes elementary net systems from region
//! sets and checks their reachability graphs; offers a polynomial SSP
//! decider for linear 2-fold systems; and generates the gadget unions that
//! encode cubic monotone one-in-three 3-SAT as separation problems.

pub mod corpus;
pub mod dot;
pub mod io;
pub mod linear2;
pub mod properties;
pub mod reductions;
pub mod regions;
pub mod synthesis;
pub mod ts;
pub mod unions;

pub use regions::{Region, RegionConstraint, RegionSolver, Sign};
pub use ts::{EventId, StateId, System, TransitionSystem, TsBuilder};
