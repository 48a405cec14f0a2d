//! Pulse design and simulation for phase-sensitive four-pulse population
//! transfer in a five-level system.
//!
//! The crate is organised around the dark (null) eigenvector of the
//! five-level Hamiltonian: [`spectrum`] computes it in closed form, [`design`]
//! chooses the control pulse that keeps one product state out of it,
//! [`superposition`] generalises the suppressed state to a superposition, and
//! [`propagate`] integrates the Schrödinger equation to check the transfer.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod design;
pub mod error;
pub mod propagate;
pub mod pulse;
pub mod spectrum;
pub mod superposition;
pub mod system;

pub use error::{Error, Result};
pub use num_complex::Complex64;
