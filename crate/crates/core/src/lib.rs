//! Decide almost-universality of ternary inhomogeneous quadratic polynomials
//! `H(x) = (Q(x) + 2B(nu, x)) / 2^alpha` whose coset `nu + N` has conductor 2,
//! and cross-check verdicts against brute-force enumeration.

// Small fixed-size matrix code reads better with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod arith;
pub mod classifier;
pub mod coset;
pub mod error;
pub mod generate;
pub mod jordan;
pub mod lattice;
pub mod local;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{GramMatrix, IdealExponent};
