//! Max-min allocation of indivisible items among players sharing one
//! submodular valuation.
//!
//! Values are exact rationals ([`Value`]). The crate provides a truncated
//! max-sum greedy, an exact branch-and-bound solver, the configuration LP with
//! its dual certificates, and generators for the standard hard instances.

pub mod error;
pub mod configlp;
pub mod exact;
pub mod format;
pub mod generators;
pub mod greedy;
pub mod instance;
pub mod itemset;
pub mod matroid;
pub mod simplex;
pub mod valuation;
pub mod value;

pub use error::{Error, Result};
pub use greedy::{solve_approx, ApproxResult, GreedyTrace, TieBreakPolicy};
pub use instance::{Allocation, Instance};
pub use itemset::ItemSet;
pub use matroid::Matroid;
pub use valuation::SetFunction;
pub use value::Value;
