use alloc::vec::Vec;

use super::DiffusionError;
use crate::numkit::UniformGrid;

/// One drift evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftEval {
    pub value: f64,
    /// `x` fell outside the tabulated grid and the value was extrapolated.
    pub outside: bool,
    /// A grid node flagged as unpopulated took part in the interpolation.
    pub unpopulated: Option<usize>,
}

impl DriftEval {
    pub fn exact(value: f64) -> Self {
        Self { value, outside: false, unpopulated: None }
    }
}

/// Position- and time-dependent drift `b(x, t)`.
pub trait Drift {
    fn eval(&self, x: f64, t: f64) -> DriftEval;
}

/// Closure-backed drift with no grid.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticDrift<F>(pub F);

impl<F: Fn(f64, f64) -> f64> Drift for AnalyticDrift<F> {
    fn eval(&self, x: f64, t: f64) -> DriftEval {
        DriftEval::exact((self.0)(x, t))
    }
}

/// Drift tabulated on a uniform grid at one or more time slices.
///
/// Piecewise linear in `x` and in `t`, constant beyond the grid and beyond the
/// first and last slices.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftField {
    grid: UniformGrid,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    populated: Option<Vec<Vec<bool>>>,
}

impl DriftField {
    pub fn stationary(grid: UniformGrid, values: Vec<f64>) -> Result<Self, DiffusionError> {
        Self::from_slices(grid, alloc::vec![0.0], alloc::vec![values])
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> f64) -> Result<Self, DiffusionError> {
        Self::stationary(grid, (0..grid.n).map(|i| f(grid.x(i))).collect())
    }

    pub fn from_slices(grid: UniformGrid, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self, DiffusionError> {
        if times.is_empty() || times.len() != values.len() {
            return Err(DiffusionError::InvalidParameter("one value slice per time stamp required"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(DiffusionError::InvalidParameter("slice times must be strictly increasing"));
        }
        if values.iter().any(|v| v.len() != grid.n) {
            return Err(DiffusionError::InvalidParameter("slice length must match the grid"));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(DiffusionError::InvalidParameter("drift values must be finite"));
        }
        Ok(Self { grid, times, values, populated: None })
    }

    /// Attaches a per-node population mask (one row per slice).
    pub fn with_mask(mut self, populated: Vec<Vec<bool>>) -> Result<Self, DiffusionError> {
        if populated.len() != self.times.len() || populated.iter().any(|m| m.len() != self.grid.n) {
            return Err(DiffusionError::InvalidParameter("mask shape must match the slices"));
        }
        self.populated = Some(populated);
        Ok(self)
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    fn eval_slice(&self, k: usize, x: f64) -> DriftEval {
        let (i, w, outside) = self.grid.locate(x);
        let v = &self.values[k];
        let value = if w == 0.0 { v[i] } else { v[i] * (1.0 - w) + v[i + 1] * w };
        let unpopulated = self.populated.as_ref().and_then(|m| {
            let m = &m[k];
            if !m[i] {
                Some(i)
            } else if w > 0.0 && !m[i + 1] {
                Some(i + 1)
            } else {
                None
            }
        });
        DriftEval { value, outside, unpopulated }
    }
}

impl Drift for DriftField {
    fn eval(&self, x: f64, t: f64) -> DriftEval {
        let nt = self.times.len();
        if nt == 1 || t <= self.times[0] {
            return self.eval_slice(0, x);
        }
        if t >= self.times[nt - 1] {
            return self.eval_slice(nt - 1, x);
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        let a = self.eval_slice(k, x);
        if w == 0.0 {
            return a;
        }
        let b = self.eval_slice(k + 1, x);
        DriftEval {
            value: a.value * (1.0 - w) + b.value * w,
            outside: a.outside,
            unpopulated: a.unpopulated.or(b.unpopulated),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn time_interpolation() {
        let g = UniformGrid::spanning(-1.0, 1.0, 3).unwrap();
        let f = DriftField::from_slices(g, vec![0.0, 1.0], vec![vec![0.0; 3], vec![2.0; 3]]).unwrap();
        assert_eq!(f.eval(0.3, 0.25).value, 0.5);
        assert_eq!(f.eval(0.3, -3.0).value, 0.0);
        assert_eq!(f.eval(0.3, 7.0).value, 2.0);
        assert!(f.eval(5.0, 0.5).outside);
    }

    #[test]
    fn mask_reports_unpopulated_node() {
        let g = UniformGrid::spanning(0.0, 2.0, 3).unwrap();
        let f = DriftField::stationary(g, vec![1.0, 2.0, 3.0]).unwrap().with_mask(vec![vec![true, true, false]]).unwrap();
        assert_eq!(f.eval(0.5, 0.0).unpopulated, None);
        assert_eq!(f.eval(1.5, 0.0).unpopulated, Some(2));
    }

    #[test]
    fn rejects_unordered_slices() {
        let g = UniformGrid::spanning(0.0, 1.0, 2).unwrap();
        assert!(DriftField::from_slices(g, vec![1.0, 0.0], vec![vec![0.0; 2]; 2]).is_err());
    }
}
