//! Self-contained numerical kernel: dense complex matrices, a cyclic Jacobi
//! Hermitian eigensolver, Haar-random unitaries, a fixed-step RK4 matrix
//! integrator, reproducible random streams and a few distribution tails.

mod eigh;
mod grid;
mod haar;
mod matrix;
mod ode;
mod rng;
pub mod stats;

pub use eigh::{hermitian_eigh, Eigh, JACOBI_SWEEP_CAP};
pub use grid::UniformGrid;
pub use haar::{complex_gaussian, haar_unitary, HaarMethod};
pub use matrix::{inner, norm, ComplexMatrix, HERMITIAN_TOL};
pub use ode::{rk4_matrix_flow, rk4_matrix_flow_observe};
pub use rng::{RngStream, StreamRng};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("matrix is not Hermitian: max |M - M^H| = {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },
    #[error("Jacobi sweep cap reached with off-diagonal norm {off_norm:e}")]
    NoConvergence { off_norm: f64 },
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("non-finite state at integrator step {step}")]
    NonFinite { step: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
