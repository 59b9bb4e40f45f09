//! One-dimensional grid calculus for the wave-equation side of stochastic
//! mechanics: a Crank-Nicolson Schrödinger solver, hydrodynamic fields
//! (`rho`, `R`, `S`, `u`, `v`, `b`, `b_*`), forward/backward generators and mean
//! accelerations, the real Markov wave equations, and residuals of the
//! Hamilton-Jacobi, continuity and scaled wave equations.
//!
//! Mass is fixed to 1; `hbar` is carried by the wavefunction.

pub mod calculus;
mod fields;
mod generator;
mod markov;
mod matching;
mod residuals;
mod schrodinger;

pub use fields::{fields_from_wavefunction, nu_from_beta, quantum_potential_term, HydroFields, DENSITY_FLOOR, PHASE_STEP_LIMIT};
pub use generator::{acceleration_fields, euler_lagrange_residual, generator_apply, Accelerations, Direction, TimeField};
pub use markov::{markov_wave_residual, solve_markov_wave, MarkovResidual, MarkovWavePair, MarkovWaveStepper, STABILITY_LIMIT};
pub use matching::{density_bin_edges, histogram_vs_density};
pub use residuals::{
    continuity_residual, hj_residual, scaled_equation_residual, schrodinger_residual, HjResidual, HjVariant, ScaledResidual, SPARSE_DENSITY_LIMIT,
};
pub use schrodinger::{evolve_schrodinger, schrodinger_trajectory, SchrodingerSolver, WavefunctionGrid, NORM_DRIFT_LIMIT};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("norm drifted by {drift:e} at step {step}")]
    NormDrift { step: usize, drift: f64 },
    #[error("phase unwrap failed between grid points {index} and {}", index + 1)]
    PhaseUnwrap { index: usize },
    #[error("Markov wave field lost positivity at step {step}, grid point {index}")]
    Positivity { step: usize, index: usize },
    #[error("step too large for the anti-diffusive equation: dt * mu_max / 2 = {ratio}")]
    Unstable { ratio: f64 },
    #[error("density below floor on {fraction} of the support")]
    SparseDensity { fraction: f64 },
    #[error("beta = {0} is outside the map's domain (beta < 2)")]
    BetaOutOfRange(f64),
    #[error("fields do not share a grid")]
    GridMismatch,
    #[error("non-finite value at step {0}")]
    NonFinite(usize),
}
