//! Simulation of dephasing-driven death and revival of tripartite steering
//! in GHZ-type mixed states.
//!
//! Qubits are ordered A⊗B⊗C with basis index `4a + 2b + c`. Only qubit A is
//! exposed to the environment.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod decoherence;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod nonmarkov;
pub mod state;
pub mod witnesses;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, Observable};
