//! Numerical Madelung hydrodynamics and Wigner-Moyal phase space for
//! nonrelativistic wavefunctions.
//!
//! The crate evolves `psi` with a split-operator solver, decomposes it into
//! amplitude and phase, and evaluates the local energy-flow fields built from
//! them: Bohm momentum and energy, the quantum potential, momentum density,
//! weak values and flow lines. A phase-space engine computes Wigner functions,
//! star products and Moyal/Baker brackets and projects them back onto
//! configuration space.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

pub mod analytic;
pub mod calculus;
pub mod emtensor;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod madelung;
pub mod phasespace;
pub mod potential;
pub mod solver;
pub mod spectral;
pub mod trajectory;
pub mod units;
pub mod weak;

pub use error::{Error, Result};
pub use field::{RealField, WaveFunction};
pub use grid::{Boundary, DerivativeScheme, Grid};
pub use potential::Potential;
pub use units::UnitSystem;
