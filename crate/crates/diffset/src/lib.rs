//! Nonexistence machinery for cyclic difference sets.
//!
//! A (v, k, λ) difference set is a k-subset D of Z_v in which every nonzero
//! residue arises exactly λ times as a difference of two elements; its
//! order is n = k − λ. This crate decides, for candidate parameters,
//! whether a battery of necessary conditions rules the set out, and
//! produces machine-checkable certificates for every exclusion:
//!
//! - [`numtheory`] — factorization, multiplicative orders, Jacobi and
//!   Hilbert symbols, local solvability of `aX² + bY² = Z²`.
//! - [`params`] — parameter triples, complementation, enumeration, and the
//!   Hadamard / planar families.
//! - [`battery`] — the individual tests (Schutzenberger, Bruck–Chowla–
//!   Ryser, Mann, Leung–Ma–Schmidt, the field-descent bound, Arasu's
//!   p-adic square condition) and the cheapest-first orchestrator.
//! - [`multipliers`] — w-multiplier certification and orbit decomposition.
//! - [`contraction`] — the contracted-coefficient solver: enumerate orbit
//!   coefficients against the linear and square equations, filter by
//!   autocorrelation, and run orbit-union searches at w = v.
//! - [`planar`] — Prime Power Conjecture scans: multiplier groups and the
//!   Evans–Mann difference-collision search.
//! - [`constructions`] — known families (quadratic residues, twin primes,
//!   Singer, m-sequences) and a brute-force finder; the soundness oracle.
//! - [`hadamard`] — the cyclic Hadamard scan.
//! - [`audit`] — independent re-verification of every exclusion witness.
//! - [`cli`] — survey drivers, JSONL certificates, markdown reports.

pub mod audit;
pub mod battery;
pub mod cli;
pub mod constructions;
pub mod contraction;
pub mod error;
pub mod hadamard;
pub mod multipliers;
pub mod numtheory;
pub mod params;
pub mod planar;

pub use error::{Error, Result};
pub use params::ParamSet;
