//! Coherent-state reproducing kernels for reparametrization-invariant systems.
//!
//! The library starts from ultralocal coherent-state representations of fields
//! (independent statistics at distinct lattice sites), enforces Hamiltonian
//! constraints by regularized spectral damping, and recenters the reproducing
//! kernel on the regularized ground state. The headline computations verify
//! that recentering recovers the correct constrained kernels with every trace
//! of the arbitrary fiducial width erased.
//!
//! Module map:
//! - [`kernel`]: Gram matrices, positive-definiteness checks, overlap
//!   quotients, and the recentering eigenproblem.
//! - [`classical`]: fixed-step integration of Hamiltonian flows and their
//!   reparametrized (lapse-multiplier) form.
//! - [`oscillator`]: truncated oscillator representations, coherent vectors,
//!   propagator and constraint-damped kernels for one degree of freedom.
//! - [`lattice`]: box lattices, field configurations, real momentum modes.
//! - [`free_field`]: ultralocal vs relativistic free-field kernels,
//!   incompatibility diagnostics, per-mode recentering.
//! - [`phi4`]: quartic lattice Hamiltonians, iterative ground states, and the
//!   recentered interacting kernel.
//! - [`ultralocal`]: general ultralocal characteristic functionals, Levy
//!   measures, admissibility and reducibility classification.
//! - [`experiments`]: config-driven experiment runner behind the CLI.

pub mod classical;
pub mod config;
pub mod error;
pub mod experiments;
pub mod free_field;
pub mod kernel;
pub mod lattice;
pub mod linalg;
pub mod oscillator;
pub mod phi4;
pub mod report;
#[cfg(test)]
pub(crate) mod testutil;
pub mod ultralocal;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
