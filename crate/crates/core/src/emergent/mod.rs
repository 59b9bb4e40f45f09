//! Operators over the density-weighted Hilbert space `(f, g) = ∫ ρ(x, t₀) f g dx`
//! singled out by a diffusion at an anchor time: position and velocity
//! matrices, the emergent commutator `[v̂, x̂] = 2ν`, the backward-drift adjoint,
//! the acceleration operator and stochastic potential, Hamiltonian expectations,
//! the Heisenberg-style matrix flow and time-ordered moments.
//!
//! Matrices are real; they are stored as [`ComplexMatrix`] with zero imaginary parts.

mod basis;
mod flow;
mod operators;

pub use basis::{build_basis, BasisKind, WeightedBasis, MAX_BASIS, MAX_GRAM_CONDITION};
pub use flow::{hamiltonian_operator, heisenberg_flow, time_ordered_moment, HeisenbergFlow};
pub use operators::{
    acceleration_and_potential, commutator_block, hamiltonian_expectation, multiplication_operator, operator_matrices, AccelerationPotential,
    HamiltonianForms, OperatorMatrix, OperatorSet,
};

use crate::numkit::{ComplexMatrix, NumError};
use crate::waveengine::WaveError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmergentError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("basis size {0} exceeds the cap of {MAX_BASIS}")]
    BasisTooLarge(usize),
    #[error("Gram matrix condition number {condition:e} exceeds the limit; use a smaller basis")]
    IllConditioned { condition: f64 },
    #[error("density is not Gaussian (max deviation {deviation:e}); use Gram-Schmidt monomials")]
    NotGaussian { deviation: f64 },
    #[error("basis is not orthonormal on this grid (max Gram defect {defect:e}); widen or refine the grid")]
    GramDefect { defect: f64 },
    #[error("fields and basis use different grids")]
    GridMismatch,
    #[error("time {0} is not on the flow's step grid")]
    OffGrid(f64),
    #[error(transparent)]
    Numerics(#[from] NumError),
    #[error(transparent)]
    Wave(#[from] WaveError),
}

// shared helper: real entries only
pub(crate) fn real_matrix(n: usize, f: impl FnMut(usize, usize) -> f64) -> ComplexMatrix {
    ComplexMatrix::from_real_fn(n, f)
}
