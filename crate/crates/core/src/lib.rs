//! Two-dimensional particle transport simulated as a discrete-time quantum
//! walk on a statevector backend, with classical Monte Carlo and
//! deterministic baselines for comparison.

pub mod circuit;
pub mod classical;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod qasm;
pub mod rng;
pub mod statevector;
pub mod strategies;
pub mod walk;

pub use error::{Error, Result};
