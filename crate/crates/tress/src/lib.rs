//! Topological effective sample sizes and Monte Carlo error diagnostics for
//! Bayesian phylogenetic MCMC output.
//!
//! The crate works on unrooted tree topologies represented as canonical split
//! sets over a shared taxon index. On top of that sit Robinson-Foulds distance
//! matrices, a family of tree ESS estimators, posterior summaries with their
//! Monte Carlo standard errors, a known-target simulated phylogenetic MCMC for
//! validating ESS estimators, ESS-based confidence intervals for split
//! probabilities, and a block-bootstrap convergence trace.
//!
//! The core is `no_std` + `alloc`; file formats and the command-line surface
//! live in the companion `tress-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bench;
pub mod bootstrap;
pub mod chain;
pub mod ci;
pub mod consensus;
pub mod dist;
pub mod error;
pub mod ess;
pub mod fake;
pub mod math;
pub mod newick;
pub mod summary;
pub mod taxa;
pub mod topology;
pub mod tree_ess;

#[cfg(test)]
pub(crate) mod testutil;

pub use chain::Chain;
pub use dist::{distance_matrix, rf_distance, DistanceMatrix};
pub use error::{Error, Result};
pub use taxa::TaxonMap;
pub use topology::{Split, Topology};
pub use tree_ess::TreeEssMethod;
