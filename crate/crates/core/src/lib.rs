//! Contextual bandit algorithms built around LinUCB with online ridge
//! regression, plus two meta-policies that learn the exploration
//! coefficient online:
//!
//! - [`policy::OplinucbPolicy`] runs Beta-Bernoulli Thompson sampling over a
//!   grid of candidate exploration values, crediting each round's realized
//!   reward to the exploration value that produced it.
//! - [`policy::DoplinucbPolicy`] fits a conditional-inference regression tree
//!   on logged `(context ⊕ exploration value) → reward` rows and plays the
//!   candidate with the highest predicted reward.
//!
//! The crate also ships replay, label-switching, and synthetic linear
//! environments ([`env`]), an Adult-format tabular ingest pipeline
//! ([`ingest`]), and the regret accounting shared by the benchmark harness
//! ([`types`]).

pub mod alpha;
pub mod ctree;
pub mod env;
pub mod ingest;
pub mod linalg;
pub mod linucb;
pub mod policy;
pub mod rng;
pub mod types;

mod error;
#[cfg(test)]
pub(crate) mod test_support;

pub use error::{Error, Result};
pub use types::{argmax_tiebreak, compute_regret, ArmId, Context, RegretCurve, RoundRecord, TieBreak};
