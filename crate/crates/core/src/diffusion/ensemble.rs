use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_distr::{Distribution, Open01, StandardNormal};

use super::{DiffusionError, Drift};
use crate::numkit::{RngStream, StreamRng, UniformGrid};

/// Draws starting positions.
pub trait InitialSampler {
    fn sample(&self, rng: &mut StreamRng) -> f64;
}

impl<F: Fn(&mut StreamRng) -> f64> InitialSampler for F {
    fn sample(&self, rng: &mut StreamRng) -> f64 {
        self(rng)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixedStart(pub f64);

impl InitialSampler for FixedStart {
    fn sample(&self, _: &mut StreamRng) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GaussianStart {
    pub mean: f64,
    pub sd: f64,
}

impl InitialSampler for GaussianStart {
    fn sample(&self, rng: &mut StreamRng) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean + self.sd * z
    }
}

/// Inverse-CDF sampler for a density tabulated on a grid
/// (piecewise constant on each cell, cell value = mean of its two nodes).
#[derive(Debug, Clone)]
pub struct GridDensitySampler {
    grid: UniformGrid,
    cdf: Vec<f64>,
}

impl GridDensitySampler {
    pub fn new(grid: UniformGrid, density: &[f64]) -> Result<Self, DiffusionError> {
        if density.len() != grid.n || density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(DiffusionError::InvalidParameter("density must be finite, non-negative and match the grid"));
        }
        let mut cdf = Vec::with_capacity(grid.n);
        cdf.push(0.0);
        for w in density.windows(2) {
            let last = *cdf.last().unwrap();
            cdf.push(last + 0.5 * (w[0] + w[1]) * grid.dx);
        }
        let total = *cdf.last().unwrap();
        if !(total > 0.0) {
            return Err(DiffusionError::InvalidParameter("density has zero mass"));
        }
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(Self { grid, cdf })
    }
}

impl InitialSampler for GridDensitySampler {
    fn sample(&self, rng: &mut StreamRng) -> f64 {
        let u: f64 = Open01.sample(rng);
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.grid.n - 1);
        let (lo, hi) = (self.cdf[i - 1], self.cdf[i]);
        let frac = if hi > lo { (u - lo) / (hi - lo) } else { 0.5 };
        self.grid.x(i - 1) + frac * self.grid.dx
    }
}

/// Which steps are kept in memory.
#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    All,
    Every(usize),
    Steps(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub nu: f64,
    pub dt: f64,
    pub steps: usize,
    pub n_paths: usize,
    pub t0: f64,
    pub record: Record,
}

impl SimulationConfig {
    pub fn new(nu: f64, dt: f64, steps: usize, n_paths: usize) -> Self {
        Self { nu, dt, steps, n_paths, t0: 0.0, record: Record::All }
    }

    pub fn recording(mut self, record: Record) -> Self {
        self.record = record;
        self
    }

    pub fn starting_at(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn validate(&self) -> Result<(), DiffusionError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(DiffusionError::InvalidParameter("dt must be positive"));
        }
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return Err(DiffusionError::InvalidParameter("nu must be non-negative"));
        }
        if self.n_paths == 0 {
            return Err(DiffusionError::InvalidParameter("at least one path is required"));
        }
        match &self.record {
            Record::Every(0) => Err(DiffusionError::InvalidParameter("record stride must be positive")),
            Record::Steps(s) if s.iter().any(|&k| k > self.steps) => Err(DiffusionError::InvalidParameter("recorded step beyond the horizon")),
            _ => Ok(()),
        }
    }

    /// Sorted, de-duplicated recorded step indices.
    pub fn recorded_steps(&self) -> Vec<usize> {
        match &self.record {
            Record::All => (0..=self.steps).collect(),
            Record::Every(k) => {
                let mut v: Vec<usize> = (0..=self.steps).step_by(*k).collect();
                if *v.last().unwrap() != self.steps {
                    v.push(self.steps);
                }
                v
            }
            Record::Steps(s) => {
                let mut v = s.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }
}

/// `P` sample paths of a diffusion, stored at the recorded steps only.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionEnsemble {
    pub nu: f64,
    pub dt: f64,
    pub t0: f64,
    /// Horizon in steps; the time stamps are `t0 + k dt`, `k = 0..=steps`.
    pub steps: usize,
    pub seed: RngStream,
    pub boundary_hits: u64,
    recorded: Vec<usize>,
    n_paths: usize,
    /// Path-major: `positions[p * recorded.len() + r]`.
    positions: Vec<f64>,
}

impl DiffusionEnsemble {
    /// Assembles an ensemble from per-path rows produced by [`simulate_path`].
    pub fn from_rows(config: &SimulationConfig, seed: RngStream, rows: Vec<(Vec<f64>, u64)>) -> Result<Self, DiffusionError> {
        let recorded = config.recorded_steps();
        let mut positions = Vec::with_capacity(rows.len() * recorded.len());
        let mut hits = 0;
        for (row, h) in &rows {
            if row.len() != recorded.len() {
                return Err(DiffusionError::InvalidParameter("row length does not match the recorded steps"));
            }
            positions.extend_from_slice(row);
            hits += h;
        }
        Ok(Self {
            nu: config.nu,
            dt: config.dt,
            t0: config.t0,
            steps: config.steps,
            seed,
            boundary_hits: hits,
            recorded,
            n_paths: rows.len(),
            positions,
        })
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn recorded_steps(&self) -> &[usize] {
        &self.recorded
    }

    pub fn time(&self, step: usize) -> f64 {
        self.t0 + step as f64 * self.dt
    }

    fn slot(&self, step: usize) -> Result<usize, DiffusionError> {
        self.recorded.binary_search(&step).map_err(|_| DiffusionError::StepNotRecorded(step))
    }

    pub fn x(&self, path: usize, step: usize) -> Result<f64, DiffusionError> {
        Ok(self.positions[path * self.recorded.len() + self.slot(step)?])
    }

    /// Positions of every path at `step`.
    pub fn column(&self, step: usize) -> Result<Vec<f64>, DiffusionError> {
        let r = self.slot(step)?;
        let w = self.recorded.len();
        Ok((0..self.n_paths).map(|p| self.positions[p * w + r]).collect())
    }

    /// Recorded positions of one path, in step order.
    pub fn path(&self, p: usize) -> &[f64] {
        let w = self.recorded.len();
        &self.positions[p * w..(p + 1) * w]
    }

    /// Fraction of simulated steps that left the drift grid.
    pub fn boundary_hit_rate(&self) -> f64 {
        self.boundary_hits as f64 / (self.n_paths as f64 * self.steps.max(1) as f64)
    }

    /// Time-reversed view `x_*(s) = x(T - s)`: step `k` maps to `steps - k`.
    pub fn reversed(&self) -> Self {
        let w = self.recorded.len();
        let recorded: Vec<usize> = self.recorded.iter().rev().map(|&k| self.steps - k).collect();
        let mut positions = Vec::with_capacity(self.positions.len());
        for p in 0..self.n_paths {
            positions.extend(self.positions[p * w..(p + 1) * w].iter().rev());
        }
        Self { recorded, positions, ..self.clone() }
    }
}

/// Simulates one Euler-Maruyama path on the stream for `path_id`.
/// Returns the recorded positions and the number of steps spent off the drift grid.
pub fn simulate_path<D: Drift + ?Sized, S: InitialSampler + ?Sized>(
    drift: &D,
    x0: &S,
    config: &SimulationConfig,
    recorded: &[usize],
    stream: RngStream,
    path_id: u64,
) -> Result<(Vec<f64>, u64), DiffusionError> {
    let mut rng = stream.derive(path_id).rng();
    let sigma = (2.0 * config.nu * config.dt).sqrt();
    let mut x = x0.sample(&mut rng);
    let mut row = vec![0.0; recorded.len()];
    let mut next = 0;
    let mut hits = 0u64;
    for k in 0..=config.steps {
        if next < recorded.len() && recorded[next] == k {
            row[next] = x;
            next += 1;
        }
        if k == config.steps {
            break;
        }
        let t = config.t0 + k as f64 * config.dt;
        let b = drift.eval(x, t);
        if !b.value.is_finite() {
            return Err(DiffusionError::NonFiniteDrift { x, t });
        }
        if b.outside {
            hits += 1;
        }
        let xi: f64 = StandardNormal.sample(&mut rng);
        x += b.value * config.dt + sigma * xi;
    }
    Ok((row, hits))
}

/// Sequential ensemble simulation; path `p` always uses stream `seed.derive(p)`,
/// so any parallel driver calling [`simulate_path`] reproduces this bit for bit.
pub fn simulate_ensemble<D: Drift + ?Sized, S: InitialSampler + ?Sized>(
    drift: &D,
    x0: &S,
    config: &SimulationConfig,
    seed: RngStream,
) -> Result<DiffusionEnsemble, DiffusionError> {
    config.validate()?;
    let recorded = config.recorded_steps();
    let rows = (0..config.n_paths as u64)
        .map(|p| simulate_path(drift, x0, config, &recorded, seed, p))
        .collect::<Result<Vec<_>, _>>()?;
    DiffusionEnsemble::from_rows(config, seed, rows)
}
