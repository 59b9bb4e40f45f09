use alloc::vec::Vec;

use super::calculus::{d1, d2};
use super::{HydroFields, WaveError};

/// A spatial field given at one or more times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeField {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl TimeField {
    /// Time-independent field: `∂t f = 0`.
    pub fn stationary(values: Vec<f64>) -> Self {
        Self { times: alloc::vec![0.0], values: alloc::vec![values] }
    }

    pub fn from_slices(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self, WaveError> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(WaveError::InvalidParameter("time derivatives need at least two slices"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(WaveError::InvalidParameter("slice times must increase"));
        }
        if values.iter().any(|v| v.len() != values[0].len()) {
            return Err(WaveError::InvalidParameter("slices must share a grid"));
        }
        Ok(Self { times, values })
    }

    pub fn is_stationary(&self) -> bool {
        self.times.len() == 1
    }

    fn nearest(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, s) in self.times.iter().enumerate() {
            if (s - t).abs() < (self.times[best] - t).abs() {
                best = k;
            }
        }
        best
    }

    /// Value at the slice nearest `t`.
    pub fn value_at(&self, t: f64) -> &[f64] {
        &self.values[self.nearest(t)]
    }

    /// `∂t f` at the slice nearest `t`: central between neighbours, one-sided at the ends.
    pub fn time_derivative(&self, t: f64) -> Vec<f64> {
        let n = self.times.len();
        if n == 1 {
            return alloc::vec![0.0; self.values[0].len()];
        }
        let k = self.nearest(t);
        let (a, b) = if k == 0 { (0, 1) } else if k == n - 1 { (n - 2, n - 1) } else { (k - 1, k + 1) };
        let dt = self.times[b] - self.times[a];
        self.values[b].iter().zip(&self.values[a]).map(|(p, q)| (p - q) / dt).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `D f = ∂t f + b f' + ν f''`
    Forward,
    /// `D_* f = ∂t f + b_* f' - ν f''`
    Backward,
}

/// Mean forward or backward derivative of `f` along the diffusion described by `fields`.
pub fn generator_apply(f: &TimeField, fields: &HydroFields, direction: Direction) -> Result<Vec<f64>, WaveError> {
    let values = f.value_at(fields.t);
    if values.len() != fields.grid.n {
        return Err(WaveError::GridMismatch);
    }
    let dt = f.time_derivative(fields.t);
    let f1 = d1(values, fields.grid.dx);
    let f2 = d2(values, fields.grid.dx);
    let (drift, sign) = match direction {
        Direction::Forward => (&fields.b, 1.0),
        Direction::Backward => (&fields.b_star, -1.0),
    };
    Ok((0..values.len()).map(|i| dt[i] + drift[i] * f1[i] + sign * fields.nu * f2[i]).collect())
}

/// Mean accelerations built from the drift fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Accelerations {
    /// `½ (D_* b + D b_*)`, i.e. `½ (D_* D + D D_*) x`.
    pub nelson: Vec<f64>,
    /// `½ (D b + D_* b_*)`, i.e. `½ (D D + D_* D_*) x`.
    pub dissipative: Vec<f64>,
    /// `(D - D_*)² x = 2u (2u)' + 2ν (2u)''`.
    pub beta_term: Vec<f64>,
}

/// Accelerations at `slices[k]`; the neighbouring slices supply `∂t b` and `∂t b_*`.
/// A single slice is treated as stationary.
pub fn acceleration_fields(slices: &[HydroFields], k: usize) -> Result<Accelerations, WaveError> {
    let at = slices.get(k).ok_or(WaveError::InvalidParameter("slice index out of range"))?;
    if slices.iter().any(|s| !s.same_grid(at)) {
        return Err(WaveError::GridMismatch);
    }
    let field = |pick: fn(&HydroFields) -> &Vec<f64>| -> Result<TimeField, WaveError> {
        if slices.len() == 1 {
            Ok(TimeField::stationary(pick(at).clone()))
        } else {
            TimeField::from_slices(slices.iter().map(|s| s.t).collect(), slices.iter().map(|s| pick(s).clone()).collect())
        }
    };
    let b = field(|s| &s.b)?;
    let bs = field(|s| &s.b_star)?;
    let db = generator_apply(&b, at, Direction::Forward)?;
    let dsb = generator_apply(&b, at, Direction::Backward)?;
    let dbs = generator_apply(&bs, at, Direction::Forward)?;
    let dsbs = generator_apply(&bs, at, Direction::Backward)?;
    let two_u: Vec<f64> = at.u.iter().map(|u| 2.0 * u).collect();
    let tu1 = d1(&two_u, at.grid.dx);
    let tu2 = d2(&two_u, at.grid.dx);
    let n = at.grid.n;
    Ok(Accelerations {
        nelson: (0..n).map(|i| 0.5 * (dsb[i] + dbs[i])).collect(),
        dissipative: (0..n).map(|i| 0.5 * (db[i] + dsbs[i])).collect(),
        beta_term: (0..n).map(|i| two_u[i] * tu1[i] + 2.0 * at.nu * tu2[i]).collect(),
    })
}

/// Residual of the β-modified Euler-Lagrange equation
/// `(½(D_*D + DD_*) + β/8 (D - D_*)²) x + ∂V = 0` (unit mass).
pub fn euler_lagrange_residual(acc: &Accelerations, beta: f64, grad_v: &[f64]) -> Vec<f64> {
    acc.nelson.iter().zip(&acc.beta_term).zip(grad_v).map(|((n, t), g)| n + beta / 8.0 * t + g).collect()
}
