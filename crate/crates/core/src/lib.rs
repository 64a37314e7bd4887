// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Gaussian simulation of two ultrastrongly coupled bosonic modes as realized
//! by a doubly pumped Josephson mixer.
//!
//! The crate is split along the physics:
//!
//! - [`quad`]: quadrature conventions, covariance matrices, squeezing and EPR metrics.
//! - [`groundstate`]: closed-system Hopfield diagonalization and ground-state squeezing.
//! - [`spectra`]: open-system quantum Langevin dynamics, output noise spectra, stability
//!   and a Lyapunov steady-state cross-check.
//! - [`calibrate`]: mapping of pump drives onto effective parameters and feasibility bounds.
//! - [`fock`]: brute-force truncated Fock-space oracle, including time-dependent
//!   integration used to validate the rotating-wave approximation.
//!
//! Sweeps fan out over [`Execution::Parallel`] workers when the `parallel` feature is
//! enabled (the default) and always return rows in input order.

// `!(x > 0.0)` is deliberate throughout: it rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod error;
pub mod exec;
pub mod fock;
pub mod groundstate;
pub mod quad;
pub mod spectra;

pub use error::{Error, Result};
pub use exec::Execution;
pub use quad::{CovarianceMatrix, EprSign, SqueezingReport};
