//! Exact-arithmetic engine for normal models of the p-adic projective line
//! and regular normal-crossings models of superelliptic covers z^d = f(t).
//!
//! The layers, bottom up:
//!
//! - [`arith`]: unbounded rationals extended by `inf`, p-adic valuations,
//!   polynomials over Q and F_p, resultants, factorization over F_p.
//! - [`maclane`]: Mac Lane inductive (pseudo)valuations — evaluation, value
//!   groups, the partial order, infima, augmentation, and the approximation
//!   chain attached to a monic irreducible polynomial.
//! - [`npath`]: shortest N-paths between rationals and the aligned-lattice
//!   machinery driving the regularity criteria.
//! - [`model`]: finite valuation sets as normal models of P^1 — closures,
//!   tree structure, crossings, cusps, specialization of horizontal divisors.
//! - [`cover`]: the superelliptic pipeline — input normalization, crossing
//!   numerics, the resolution algorithm producing the regular base, the
//!   removability pass, and minimization.
//! - [`fiber`]: the decorated dual graph of the special fiber of the cover's
//!   model — multiplicities, component counts, self-intersections, genera.
//!
//! Everything is exact; no floating point appears anywhere.

pub mod arith;
pub mod cover;
pub mod fiber;
pub mod maclane;
pub mod model;
pub mod npath;

use thiserror::Error as ThisError;

/// Errors surfaced by the engine.  `StructureViolation` always signals a
/// broken internal invariant rather than bad input.
#[derive(Debug, Clone, ThisError)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not a key polynomial: {0}")]
    NotKeyPolynomial(String),
    #[error("invalid augmentation: {0}")]
    InvalidAugmentation(String),
    #[error("requires residue field extension: {0}")]
    RequiresResidueExtension(String),
    #[error("reducible input: {0}")]
    ReducibleInput(String),
    #[error("degenerate lattice: {0}")]
    DegenerateLattice(String),
    #[error("branch divisor meets crossing: {0}")]
    BranchMeetsCrossing(String),
    #[error("non-termination: {0}")]
    NonTermination(String),
    #[error("clustering precondition failed: {0}")]
    NotPartitioned(String),
    #[error("structure violation: {0}")]
    StructureViolation(String),
}
