//! Hidden-variable sampling over finite-dimensional Hilbert spaces: a Haar-random
//! hidden vector `α`, the polychotomic rule selecting the eigenvalue whose
//! eigenvector maximizes `|⟨φ_k|ψ⟩| / |⟨φ_k|α⟩|`, Born-rule Monte Carlo, alternative
//! hidden evolutions `U_R` and the observable trajectories they produce.

mod evolve;
mod select;

pub use evolve::{evolve_pair, jump_statistics, trajectory, ur_invariance_test, EvolutionSpec, InvarianceReport, JumpStatistics, ObservableTrajectory, SpecFrequencies};
pub use select::{
    born_estimate, born_from_counts, exponential_race_probabilities, polychotomic_select, random_state, sample_alpha, signal_noise_state, BornEstimate, HiddenPair, Observable,
    Selection,
};

use crate::numkit::NumError;
use thiserror::Error;

/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 64;

/// Unit-norm tolerance for `ψ` and the fixed norm of `α`.
pub const NORM_TOL: f64 = 1e-12;

/// Largest `|U^H U − I|` accepted for a hidden evolution step.
pub const UNITARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HiddenError {
    #[error("dimension {0} outside 2..={MAX_DIM}")]
    Dimension(usize),
    #[error("vector norm {found} differs from the required {expected}")]
    Norm { expected: f64, found: f64 },
    #[error("vector lengths do not match the observable")]
    Shape,
    #[error("state is orthogonal to every eigenvector")]
    NoSupport,
    #[error("step map {step} is not unitary (defect {defect:e})")]
    NonUnitary { step: usize, defect: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("signal and noise cancel exactly")]
    Cancellation,
    #[error(transparent)]
    Numerics(#[from] NumError),
}
