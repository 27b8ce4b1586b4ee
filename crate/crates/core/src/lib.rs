//! Spectral Galerkin machinery for the incompressible Navier-Stokes equations
//! on a periodic box.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: torus geometry, the divergence-free Fourier basis, the Leray
//!   projector, grid transforms and a brute-force nonlinear oracle.
//! * [`lift`]: initial time derivatives of the solution, the Taylor lift `β`
//!   and the corrected forcing `θ` that turn the problem into one with zero
//!   initial data.
//! * [`galerkin`]: the finite-dimensional ODE system (trilinear tensor, lift
//!   matrices, projected forcing) and its residual.
//! * [`continuation`]: Runge-Kutta integration, the horizon-extension ladder,
//!   blow-up detection and stability diagnostics.
//! * [`exhaust`]: cutoff functions and the growing-torus approximation of the
//!   whole-space problem.
//! * [`cli`]: configuration, presets and the command implementations behind
//!   the `lerayflow` binary.

// `!(x > 0.0)` is how validation rejects NaN; index loops mirror the maths.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod continuation;
pub mod error;
pub mod exhaust;
pub mod galerkin;
pub mod lift;
pub mod spectral;

pub use error::{Error, Result};

/// Version tag embedded in every file this crate writes.
pub const FORMAT_VERSION: u32 = 1;
