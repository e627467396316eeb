//! Bond percolation laboratory for finite, mostly vertex-transitive graphs.
//!
//! The crate samples Bernoulli bond percolation, decomposes clusters with a
//! union-find, enumerates tiny graphs exactly, estimates thresholds and giant
//! cluster statistics by Monte Carlo, and computes the geometric quantities
//! (balanced separators, orbit-based decompositions) that decide whether a
//! giant cluster is unique.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod error;
pub mod estimators;
pub mod graphs;
pub mod oracle;
pub mod percolation;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod structure;
pub mod unionfind;

pub use error::{Error, Result};
pub use graphs::Graph;
pub use percolation::{ClusterDecomposition, Configuration};
pub use scalar::Scalar;

/// Floating-point probability type used by the Monte Carlo estimators.
pub type Real = f64;
/// Exact probability type used by the enumeration oracle.
pub type Exact = num_rational::BigRational;
