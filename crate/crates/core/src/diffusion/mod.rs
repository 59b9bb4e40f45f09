//! Generalized Brownian motion `dx = b(x,t) dt + dw`, `E dw^2 = 2 nu dt`:
//! Euler-Maruyama ensembles, forward/backward drift estimation, Wiener
//! covariance structure and the discretized kinetic and Lagrangian estimators
//! of the stochastic action principles. Mass is fixed to 1 throughout.

mod action;
mod drift;
mod ensemble;
mod estimate;

pub use action::{fit_inverse_dt, kinetic_action_terms, yasue_action_estimate, ActionEstimate, InverseDtFit, KineticTerms, LagrangianKind};
pub use drift::{AnalyticDrift, Drift, DriftEval, DriftField};
pub use ensemble::{
    simulate_ensemble, simulate_path, DiffusionEnsemble, FixedStart, GaussianStart, GridDensitySampler, InitialSampler, Record, SimulationConfig,
};
pub use estimate::{covariance_stats, estimate_drifts, BinStat, CovarianceStats, DriftEstimate, MIN_BIN_COUNT};

use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffusionError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("non-finite drift at x = {x}, t = {t}")]
    NonFiniteDrift { x: f64, t: f64 },
    #[error("step {0} was not recorded in the ensemble")]
    StepNotRecorded(usize),
    #[error("every drift bin has fewer than the minimum sample count")]
    AllBinsEmpty,
    #[error("paths visit unpopulated drift bins {0:?}")]
    EmptyBins(Vec<usize>),
}
