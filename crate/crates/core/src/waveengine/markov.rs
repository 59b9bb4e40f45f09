use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::calculus::{antiderivative, d2, Banded5};
use super::{HydroFields, WaveError, DENSITY_FLOOR};
use crate::numkit::UniformGrid;

/// Upper bound on `dt · μ_max / 2` for the anti-diffusive `φ+` step, where `μ_max`
/// is a Gershgorin bound on the growth rate. Crank-Nicolson amplifies the fastest
/// growing mode by `(1 + a)/(1 - a)` with `a = dt μ / 2`, so `a` must stay below 1;
/// the limit keeps that factor at most 3.
pub const STABILITY_LIMIT: f64 = 0.5;

/// The real pair `φ± = exp(R ± S)` of the Markov wave equations
/// `[2ν² ∂² + U] φ± = ∓ 2ν ∂t φ±`, with `R = ½ ln ρ` and `2ν ∂S = v`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovWavePair {
    pub grid: UniformGrid,
    pub t: f64,
    pub nu: f64,
    pub phi_plus: Vec<f64>,
    pub phi_minus: Vec<f64>,
    pub potential: Vec<f64>,
    /// Resolved points (density above the floor, stencils inside the grid);
    /// residuals and positivity are checked here.
    pub mask: Vec<bool>,
}

impl MarkovWavePair {
    /// Builds the pair from hydrodynamic fields; `S` is gauged to zero at the left end.
    pub fn from_fields(fields: &HydroFields, potential: &[f64]) -> Result<Self, WaveError> {
        if !(fields.nu > 0.0) {
            return Err(WaveError::InvalidParameter("the Markov wave equations need nu > 0"));
        }
        if potential.len() != fields.grid.n {
            return Err(WaveError::GridMismatch);
        }
        let floor = DENSITY_FLOOR * fields.rho.iter().copied().fold(0.0, f64::max);
        let s: Vec<f64> = antiderivative(&fields.v, fields.grid.dx).iter().map(|a| a / (2.0 * fields.nu)).collect();
        Ok(Self {
            grid: fields.grid,
            t: fields.t,
            nu: fields.nu,
            phi_plus: fields.r.iter().zip(&s).map(|(r, s)| (r + s).exp()).collect(),
            phi_minus: fields.r.iter().zip(&s).map(|(r, s)| (r - s).exp()).collect(),
            potential: potential.to_vec(),
            mask: fields.mask.iter().zip(&fields.rho).map(|(m, r)| *m && *r > floor).collect(),
        })
    }

    pub fn product(&self) -> Vec<f64> {
        self.phi_plus.iter().zip(&self.phi_minus).map(|(a, b)| a * b).collect()
    }

    /// Largest `|φ+ φ- - ρ|` over the mask.
    pub fn product_defect(&self, rho: &[f64]) -> f64 {
        self.product().iter().zip(rho).zip(&self.mask).filter(|(_, m)| **m).map(|((p, r), _)| (p - r).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovResidual {
    /// Fitted additive constant in `U` (zero when not fitted).
    pub constant: f64,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    /// Sup norms over the mask.
    pub plus_sup: f64,
    pub minus_sup: f64,
}

impl MarkovResidual {
    pub fn sup(&self) -> f64 {
        self.plus_sup.max(self.minus_sup)
    }
}

/// Residuals `[2ν² ∂² + U + c] φ± ± 2ν ∂t φ±` at `slices[k]`. One slice means a
/// stationary check. With `fit_constant` the constant `c` minimizes the squared
/// residual over both equations.
pub fn markov_wave_residual(slices: &[MarkovWavePair], k: usize, fit_constant: bool) -> Result<MarkovResidual, WaveError> {
    let at = slices.get(k).ok_or(WaveError::InvalidParameter("slice index out of range"))?;
    if slices.iter().any(|s| s.grid != at.grid) {
        return Err(WaveError::GridMismatch);
    }
    let dt_of = |pick: fn(&MarkovWavePair) -> &Vec<f64>| -> Vec<f64> {
        let n = slices.len();
        if n == 1 {
            return alloc::vec![0.0; at.grid.n];
        }
        let (a, b) = if k == 0 { (0, 1) } else if k == n - 1 { (n - 2, n - 1) } else { (k - 1, k + 1) };
        let h = slices[b].t - slices[a].t;
        pick(&slices[b]).iter().zip(pick(&slices[a])).map(|(p, q)| (p - q) / h).collect()
    };
    let two_nu2 = 2.0 * at.nu * at.nu;
    let raw = |phi: &[f64], dphi: &[f64], sign: f64| -> Vec<f64> {
        let lap = d2(phi, at.grid.dx);
        (0..phi.len()).map(|i| two_nu2 * lap[i] + at.potential[i] * phi[i] + sign * 2.0 * at.nu * dphi[i]).collect()
    };
    let mut plus = raw(&at.phi_plus, &dt_of(|p| &p.phi_plus), 1.0);
    let mut minus = raw(&at.phi_minus, &dt_of(|p| &p.phi_minus), -1.0);
    let idx: Vec<usize> = (0..at.grid.n).filter(|&i| at.mask[i]).collect();
    let constant = if fit_constant {
        let num: f64 = idx.iter().map(|&i| plus[i] * at.phi_plus[i] + minus[i] * at.phi_minus[i]).sum();
        let den: f64 = idx.iter().map(|&i| at.phi_plus[i].powi(2) + at.phi_minus[i].powi(2)).sum();
        if den > 0.0 {
            -num / den
        } else {
            0.0
        }
    } else {
        0.0
    };
    for i in 0..at.grid.n {
        plus[i] += constant * at.phi_plus[i];
        minus[i] += constant * at.phi_minus[i];
    }
    let sup = |r: &[f64]| idx.iter().map(|&i| r[i].abs()).fold(0.0, f64::max);
    Ok(MarkovResidual { constant, plus_sup: sup(&plus), minus_sup: sup(&minus), plus, minus })
}

/// Crank-Nicolson steppers for the two Markov wave equations with a static `U`.
///
/// `φ-` obeys the forward heat equation `∂t φ- = ν φ-'' + U φ- / 2ν` and is
/// unconditionally stable. `φ+` obeys the backward heat equation
/// `∂t φ+ = -ν φ+'' - U φ+ / 2ν`, which is ill-posed forward in time; it can only
/// be stepped over short horizons with `dt · μ_max / 2 <` [`STABILITY_LIMIT`].
#[derive(Debug, Clone)]
pub struct MarkovWaveStepper {
    nu: f64,
    dt: f64,
    dx: f64,
    potential: Vec<f64>,
    minus_lhs: Banded5<f64>,
    plus_lhs: Banded5<f64>,
    growth_ratio: f64,
}

impl MarkovWaveStepper {
    pub fn new(grid: UniformGrid, nu: f64, potential: &[f64], dt: f64) -> Result<Self, WaveError> {
        if !(nu > 0.0 && dt > 0.0) {
            return Err(WaveError::InvalidParameter("nu and dt must be positive"));
        }
        if potential.len() != grid.n || potential.iter().any(|u| !u.is_finite()) {
            return Err(WaveError::InvalidParameter("potential must be finite and match the grid"));
        }
        let n = grid.n;
        let h = nu / (12.0 * grid.dx * grid.dx);
        // M = -ν ∂² - U / 2ν; φ- : ∂t φ = -M φ, φ+ : ∂t φ = M φ
        let m_diag: Vec<f64> = potential.iter().map(|u| 30.0 * h - u / (2.0 * nu)).collect();
        let (m1, m2) = (-16.0 * h, h);
        let build = |s: f64| {
            let off1 = alloc::vec![s * m1 * 0.5 * dt; n];
            let off2 = alloc::vec![s * m2 * 0.5 * dt; n];
            let d: Vec<f64> = m_diag.iter().map(|m| 1.0 + s * 0.5 * dt * m).collect();
            Banded5::factor(&off2, &off1, &d, &off1, &off2)
        };
        let minus_lhs = build(1.0).ok_or(WaveError::InvalidParameter("singular implicit matrix"))?;
        let mu_max = 64.0 * h + potential.iter().map(|u| -u / (2.0 * nu)).fold(f64::NEG_INFINITY, f64::max).max(0.0);
        let growth_ratio = 0.5 * dt * mu_max;
        let plus_lhs = build(-1.0).ok_or(WaveError::Unstable { ratio: growth_ratio })?;
        Ok(Self { nu, dt, dx: grid.dx, potential: potential.to_vec(), minus_lhs, plus_lhs, growth_ratio })
    }

    /// `dt · μ_max / 2` for the anti-diffusive equation.
    pub fn growth_ratio(&self) -> f64 {
        self.growth_ratio
    }

    // (ν ∂² + U / 2ν) φ
    fn apply_generator(&self, phi: &[f64]) -> Vec<f64> {
        let lap = super::calculus::apply_laplacian(phi, self.dx);
        lap.iter().zip(phi).zip(&self.potential).map(|((l, p), u)| self.nu * l + u / (2.0 * self.nu) * p).collect()
    }

    pub fn step_minus(&self, phi: &mut [f64]) {
        let g = self.apply_generator(phi);
        phi.iter_mut().zip(&g).for_each(|(p, g)| *p += 0.5 * self.dt * g);
        self.minus_lhs.solve_in_place(phi);
    }

    pub fn step_plus(&self, phi: &mut [f64]) -> Result<(), WaveError> {
        if !(self.growth_ratio < STABILITY_LIMIT) {
            return Err(WaveError::Unstable { ratio: self.growth_ratio });
        }
        let g = self.apply_generator(phi);
        phi.iter_mut().zip(&g).for_each(|(p, g)| *p -= 0.5 * self.dt * g);
        self.plus_lhs.solve_in_place(phi);
        Ok(())
    }
}

/// Evolves both fields for `steps` steps, returning every state including the
/// first. Fails if either field turns non-positive on the mask.
pub fn solve_markov_wave(pair0: &MarkovWavePair, dt: f64, steps: usize) -> Result<Vec<MarkovWavePair>, WaveError> {
    let stepper = MarkovWaveStepper::new(pair0.grid, pair0.nu, &pair0.potential, dt)?;
    if !(stepper.growth_ratio() < STABILITY_LIMIT) {
        return Err(WaveError::Unstable { ratio: stepper.growth_ratio() });
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(pair0.clone());
    let mut cur = pair0.clone();
    for s in 1..=steps {
        stepper.step_minus(&mut cur.phi_minus);
        stepper.step_plus(&mut cur.phi_plus)?;
        cur.t = pair0.t + s as f64 * dt;
        for (i, m) in cur.mask.iter().enumerate() {
            if *m && !(cur.phi_plus[i] > 0.0 && cur.phi_minus[i] > 0.0) {
                return Err(WaveError::Positivity { step: s, index: i });
            }
        }
        out.push(cur.clone());
    }
    Ok(out)
}
