//! Weighted averages of Trotterized circuits.
//!
//! The crate builds product formulas for grouped Pauli Hamiltonians, mixes
//! several of them into a non-unitary channel `ρ ↦ Σ p_m U_m ρ U_m†`, and
//! measures how far such a channel is from exact evolution. It also carries
//! the tools needed to explain the numbers: the split of an error into parts
//! that do and do not commute with `H`, symmetry-conjugated ensembles,
//! sampled orderings with their concentration bound, an infinite MPS solver
//! that uses the same averaging in imaginary time, and a shot sampler.
//!
//! Everything is dense and `no_std` (with `alloc`); file formats and the
//! command line live in a companion crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod channels;
pub mod error;
pub mod error_structure;
pub mod linalg;
pub mod fit;
pub mod formulas;
pub mod itebd;
pub mod pauli;
pub mod rng;
pub mod sampling;
pub mod shots;
pub mod symmetry;

pub use error::{Error, Result};
pub use linalg::{Matrix, C64};
