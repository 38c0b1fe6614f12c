//! Fill analysis of B-tree leaves ("blocks") under batched random insertions.
//!
//! A workload inserts `r` consecutive keys at a uniformly random rank, over and
//! over. Each splitting strategy decides what happens when a batch overflows a
//! block of capacity `B`. This crate provides:
//!
//! * [`histogram`]: the block-size histogram the simulators evolve, and
//!   size-proportional sampling of the block a batch lands in.
//! * [`strategies`]: per-batch transition functions for even, deferred even and
//!   the two uneven splitting regimes, plus the key-level `target_split`.
//! * [`simulate`]: Monte Carlo on the histogram, the deterministic expected-value
//!   recurrence, and a key-level oracle simulator.
//! * [`spectral`]: the transition matrix `A(B, r)`, its support set, principal
//!   eigenvector, spectral projection and Perron margin.
//! * [`bounds`]: closed-form fills and lower bounds.

pub mod bounds;
pub mod error;
mod fenwick;
pub mod histogram;
pub mod params;
pub mod simulate;
pub mod spectral;
pub mod strategies;

pub use error::{Error, Result};
pub use histogram::{BlockHistogram, FullnessSummary, Outcome, SeedingMode};
pub use params::SplitParams;
pub use strategies::{Strategy, StrategyKind, UnevenMode};
