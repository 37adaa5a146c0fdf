//! Carleman-linearized D2Q9 lattice Boltzmann toolkit with an exact
//! statevector-level emulation of the HHL linear-system algorithm.
//!
//! The pipeline has four stages:
//!
//! 1. [`lbm`] — classical D2Q9 BGK solver (periodic, bounce-back and
//!    lid-driven boundaries), used as the physics reference.
//! 2. [`carleman`] — Carleman linearization of the collision/streaming
//!    update at truncation orders 1 and 2, and the RMSE of the linearized
//!    evolution against the reference solver.
//! 3. [`linsys`] — the multi-time-step block system `Ã x = b`, its
//!    Hermitian embedding `A = [[0, Ãᵀ], [Ã, 0]]` padded to a power of
//!    two, and the exact forward-substitution solver.
//! 4. [`hhl`] — analytic emulation of HHL (phase-estimation kernel,
//!    spectrum-driven ancilla rotations, post-selection) together with a
//!    brute-force full-register oracle used to validate it.
//!
//! [`spectra`] analyzes eigenvalue distributions of the embedded systems
//! and supports driving HHL for a large lattice with the spectrum of a
//! small one. [`resources`] provides CNOT-count upper bounds for the
//! Hamiltonian-simulation stage.

// stencil kernels index several arrays in lockstep; negated comparisons
// reject NaN parameters
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carleman;
pub mod hhl;
pub mod lbm;
pub mod linalg;
pub mod linsys;
pub mod resources;
pub mod sparse;
pub mod spectra;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
