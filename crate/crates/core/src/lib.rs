//! Numerical kernel for three linked laboratories:
//!
//! * [`diffusion`] and [`waveengine`]: Nelson-style stochastic mechanics with an
//!   arbitrary diffusion constant, the Schrödinger and Markov wave equations, and
//!   the Hamilton-Jacobi residuals that separate quantum from dissipative diffusion.
//! * [`emergent`] and [`tracedyn`]: operator matrices over a density-weighted
//!   Hilbert space, the emergent commutator, and trace dynamics over matrix phase
//!   space.
//! * [`hiddenvars`]: Haar-random hidden vectors and the polychotomic selection rule.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the experiment
//! runner and parallel drivers live in the `stochtrace` companion crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod diffusion;
pub mod emergent;
pub mod hiddenvars;
pub mod numkit;
pub mod tracedyn;
pub mod waveengine;

pub use num_complex::Complex64;
pub use numkit::{ComplexMatrix, RngStream, UniformGrid};
