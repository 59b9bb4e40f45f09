//! Parallel drivers that reproduce the sequential kernels bit for bit: every path or
//! sample draws from its own derived stream and results are collected in index order.

use rayon::prelude::*;
use stochtrace_core::diffusion::{simulate_path, DiffusionEnsemble, DiffusionError, Drift, InitialSampler, SimulationConfig};
use stochtrace_core::RngStream;

pub fn simulate<D, S>(drift: &D, x0: &S, config: &SimulationConfig, seed: RngStream) -> Result<DiffusionEnsemble, DiffusionError>
where
    D: Drift + Sync + ?Sized,
    S: InitialSampler + Sync + ?Sized,
{
    config.validate()?;
    let recorded = config.recorded_steps();
    let rows = (0..config.n_paths as u64)
        .into_par_iter()
        .map(|p| simulate_path(drift, x0, config, &recorded, seed, p))
        .collect::<Result<Vec<_>, _>>()?;
    DiffusionEnsemble::from_rows(config, seed, rows)
}

/// Counts of `f(i) ∈ 0..k` over `i ∈ 0..n`, evaluated in parallel.
pub fn count_categories<F, E>(n: usize, k: usize, f: F) -> Result<Vec<u64>, E>
where
    F: Fn(usize) -> Result<usize, E> + Sync,
    E: Send,
{
    (0..n)
        .into_par_iter()
        .try_fold(
            || vec![0u64; k],
            |mut acc, i| {
                acc[f(i)?] += 1;
                Ok(acc)
            },
        )
        .try_reduce(|| vec![0u64; k], |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()))
}
