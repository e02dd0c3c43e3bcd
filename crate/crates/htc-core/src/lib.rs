//! Identifiability analysis for linear structural equation models given as
//! mixed graphs.
//!
//! A mixed graph encodes a linear structural equation model: directed edges
//! carry regression coefficients (`Lambda`), bidirected edges carry error
//! covariances (`Omega`), and the model's covariance matrix is
//! `Sigma = (I - Lambda)^{-T} Omega (I - Lambda)^{-1}`. This crate decides,
//! in polynomial time via max-flow reductions, whether the parameters can be
//! recovered from `Sigma` (half-trek identifiable), provably cannot up to an
//! infinite fiber (infinite-to-one), or neither. It also recovers parameters
//! numerically from covariance matrices using the identifiability witness,
//! checks the complementary Jacobian rank condition, reproduces exhaustive
//! censuses of small unlabeled graphs, and runs random-graph simulations.
//!
//! The `htc` binary exposes all of this on the command line.

pub mod cli;
pub mod enumerate;
pub mod error;
pub mod gcrit;
pub mod graph;
pub mod htc;
pub mod maxflow;
pub mod numeric;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use graph::{MixedComponent, MixedGraph, NodeId, NodeSet};
pub use htc::{
    classify, classify_via_decomposition, htc_identifiable, htc_infinite_to_one, Classification,
    HtcWitness, Verdict, VerdictKind,
};
