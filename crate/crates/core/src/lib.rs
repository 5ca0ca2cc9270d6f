//! Physical-constraint-preserving recovery of primitive variables for
//! special relativistic magnetohydrodynamics.
//!
//! Given a conservative state `U = (D, m, B, E)`, the primitive state
//! `Q = (rho, v, B, p)` is found by solving one scalar equation `F(xi) = 0`
//! for `xi = rho h W^2` with a Newton-Raphson iteration whose starting point
//! provably keeps every iterate physical and guarantees convergence.
//!
//! Modules:
//! - [`eos`]: equations of state and their inverses.
//! - [`state`]: primitive/conservative states, forward map, admissibility.
//! - [`master`]: the master function, its derivative, and analytic bounds.
//! - [`recovery`]: the PCP Newton-Raphson solver and reference solvers.
//! - [`bench`]: randomized stress suites and statistics.
//! - [`diagnostics`]: numerical checks of the structural properties of `F`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
mod dd;
pub mod diagnostics;
pub mod eos;
pub mod error;
pub mod master;
pub mod recovery;
pub mod state;

pub use eos::Eos;
pub use error::{Error, Result};
pub use recovery::{recover, solve, Recovery, RecoveryReport, SolverConfig, SolverMode, Status};
pub use state::{Conserved, Primitive, Scalars};
