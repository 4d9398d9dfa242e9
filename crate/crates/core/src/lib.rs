//! Connected-piece cake division with exact rational arithmetic.
//!
//! Approximately envy-free allocations via moving knives, ρ-mean welfare via
//! interval scheduling, exhaustive Nash welfare search, hardness gadgets, and
//! brute-force grid oracles that certify the approximation bounds.

pub mod allocation;
pub mod compare;
pub mod discretize;
pub mod error;
pub mod exhaustive;
pub mod hardness;
pub mod jisp;
pub mod knife;
pub mod model;
pub mod oracle;
pub mod random;
pub mod rational;

pub use allocation::{
    complete_allocation, envy_ratio, nsw, rho_mean, sw, unassigned_gaps, Allocation, EnvyRatio,
    PartialAllocation, UnassignedSet, WelfareReport,
};
pub use compare::Enclosure;
pub use error::{CakeError, Result};
pub use model::{Agent, CakeInstance, Interval, Piece, PiecewiseDensity, Violation};
pub use rational::{parse_rat, Rat};
