use alloc::vec::Vec;

/// Uniform 1-D grid `x_i = x0 + i dx`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl UniformGrid {
    /// `None` unless `dx > 0`, `n >= 2` and everything is finite.
    pub fn new(x0: f64, dx: f64, n: usize) -> Option<Self> {
        (x0.is_finite() && dx.is_finite() && dx > 0.0 && n >= 2).then_some(Self { x0, dx, n })
    }

    /// `n` points spanning `[lo, hi]` inclusive.
    pub fn spanning(lo: f64, hi: f64, n: usize) -> Option<Self> {
        if n < 2 || !(hi > lo) {
            return None;
        }
        Self::new(lo, (hi - lo) / (n - 1) as f64, n)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn last(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x0 && x <= self.last()
    }

    /// Piecewise-linear interpolation with constant extrapolation.
    /// Returns the value and whether `x` was outside the grid.
    pub fn interpolate(&self, values: &[f64], x: f64) -> (f64, bool) {
        let (i, w, outside) = self.locate(x);
        if w == 0.0 {
            (values[i], outside)
        } else {
            (values[i] * (1.0 - w) + values[i + 1] * w, outside)
        }
    }

    /// Cell index and weight of the right node, clamped to the grid.
    pub fn locate(&self, x: f64) -> (usize, f64, bool) {
        let s = (x - self.x0) / self.dx;
        if !(s > 0.0) {
            return (0, 0.0, s < 0.0 || s.is_nan());
        }
        let last = (self.n - 1) as f64;
        if s >= last {
            return (self.n - 1, 0.0, s > last);
        }
        let i = s as usize;
        (i, s - i as f64, false)
    }
}
