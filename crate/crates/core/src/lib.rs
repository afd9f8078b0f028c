//! Witness-subsystem solver for probabilistic reachability constraints on
//! DTMCs and MDPs, organised around directed tree partitions of the
//! underlying graph.
//!
//! The crate provides:
//!
//! - an explicit-state model of substochastic DTMCs/MDPs ([`model`]),
//! - exact (rational) and floating-point reachability solvers, including
//!   the interface-assumption transform used for block-local value
//!   computation ([`reach`]),
//! - directed tree/path partitions, their validation, exact small-instance
//!   width computation and the oneway-bisection gadget ([`partition`]),
//! - the d-dimensional matrix-pair chain problem with the reduction chain
//!   from the partition problem down to normalized nonnegative 3-MCP
//!   instances ([`mcp`]),
//! - generators for the layered hardness chains built from normalized
//!   3-MCP instances ([`chain`]),
//! - convex-hull based domination pruning between partial subsystems
//!   ([`hull`]),
//! - the tree-partition witness solver together with a brute-force oracle
//!   ([`witness`]).
//!
//! All correctness-critical paths run over arbitrary-precision rationals;
//! `f64` variants with explicit tolerances exist for large workloads and are
//! heuristic by design.

pub mod chain;
pub mod hull;
pub mod mcp;
pub mod model;
pub mod par;
pub mod partition;
pub mod reach;
pub mod scalar;
pub mod witness;

mod lp;

pub use model::{ModelKind, ProbabilisticModel, StateId, UnderlyingGraph};
pub use scalar::{BigRational, Scalar};
