//! Two non-interacting two-level atoms dispersively coupled to one quantized
//! field mode.
//!
//! The crate evolves the atom pair by three routes (exact truncated-Fock
//! propagation, numerical exponentiation of the effective Hamiltonian, and
//! closed-form reduced states), computes two-qubit concurrence, and detects
//! entanglement beats and dead valleys in concurrence time series.

// `!(x > y)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod model;
pub mod scan;
pub mod states;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
