//! Finite differences on a uniform grid: fourth-order central stencils in the
//! interior, second-order stencils on the two outermost nodes at each end.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

/// Smallest grid the stencils support.
pub const MIN_POINTS: usize = 5;

pub fn d1<T>(f: &[T], dx: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = f.len();
    assert!(n >= MIN_POINTS, "grid too small for the derivative stencils");
    let mut out = vec![f[0]; n];
    let h = 1.0 / dx;
    out[0] = (f[1] * 4.0 - f[0] * 3.0 - f[2]) * (0.5 * h);
    out[1] = (f[2] - f[0]) * (0.5 * h);
    for i in 2..n - 2 {
        out[i] = ((f[i + 1] - f[i - 1]) * 8.0 - (f[i + 2] - f[i - 2])) * (h / 12.0);
    }
    out[n - 2] = (f[n - 1] - f[n - 3]) * (0.5 * h);
    out[n - 1] = (f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) * (0.5 * h);
    out
}

pub fn d2<T>(f: &[T], dx: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = f.len();
    assert!(n >= MIN_POINTS, "grid too small for the derivative stencils");
    let mut out = vec![f[0]; n];
    let h2 = 1.0 / (dx * dx);
    out[0] = (f[0] * 2.0 - f[1] * 5.0 + f[2] * 4.0 - f[3]) * h2;
    out[1] = (f[0] + f[2] - f[1] * 2.0) * h2;
    for i in 2..n - 2 {
        out[i] = ((f[i - 1] + f[i + 1]) * 16.0 - f[i] * 30.0 - (f[i - 2] + f[i + 2])) * (h2 / 12.0);
    }
    out[n - 2] = (f[n - 3] + f[n - 1] - f[n - 2] * 2.0) * h2;
    out[n - 1] = (f[n - 1] * 2.0 - f[n - 2] * 5.0 + f[n - 3] * 4.0 - f[n - 4]) * h2;
    out
}

/// Trapezoid rule.
pub fn integrate(f: &[f64], dx: f64) -> f64 {
    match f.len() {
        0 | 1 => 0.0,
        n => dx * (f[1..n - 1].iter().sum::<f64>() + 0.5 * (f[0] + f[n - 1])),
    }
}

/// Cumulative trapezoid antiderivative, zero at the left end.
pub fn antiderivative(f: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    for i in 0..f.len() {
        if i > 0 {
            acc += 0.5 * dx * (f[i] + f[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// Pentadiagonal system stored by diagonals, factored once by banded
/// elimination without pivoting. Safe for the diagonally dominant or
/// positive-real matrices used by the implicit steppers.
#[derive(Debug, Clone)]
pub struct Banded5<T> {
    // l1[i] = L(i, i-1), l2[i] = L(i, i-2); u0, u1, u2 are the diagonal and
    // the two superdiagonals of U
    l1: Vec<T>,
    l2: Vec<T>,
    u0: Vec<T>,
    u1: Vec<T>,
    u2: Vec<T>,
}

impl<T> Banded5<T>
where
    T: num_traits::Num + Copy,
{
    /// Factors the matrix with diagonals `m2` (i, i-2), `m1` (i, i-1),
    /// `d` (i, i), `p1` (i, i+1), `p2` (i, i+2); entries outside the matrix are ignored.
    /// Returns `None` on a zero pivot.
    pub fn factor(m2: &[T], m1: &[T], d: &[T], p1: &[T], p2: &[T]) -> Option<Self> {
        let n = d.len();
        let z = T::zero();
        let (mut l1, mut l2) = (vec![z; n], vec![z; n]);
        let (mut u0, mut u1, mut u2) = (vec![z; n], vec![z; n], vec![z; n]);
        for i in 0..n {
            // row i of A: a(i,i-2)=m2, a(i,i-1)=m1, a(i,i)=d, a(i,i+1)=p1, a(i,i+2)=p2
            if i >= 2 {
                l2[i] = m2[i] / u0[i - 2];
            }
            if i >= 1 {
                let a = m1[i] - if i >= 2 { l2[i] * u1[i - 2] } else { z };
                l1[i] = a / u0[i - 1];
            }
            let mut diag = d[i];
            if i >= 1 {
                diag = diag - l1[i] * u1[i - 1];
            }
            if i >= 2 {
                diag = diag - l2[i] * u2[i - 2];
            }
            if diag == z {
                return None;
            }
            u0[i] = diag;
            if i + 1 < n {
                u1[i] = p1[i] - if i >= 1 { l1[i] * u2[i - 1] } else { z };
            }
            if i + 2 < n {
                u2[i] = p2[i];
            }
        }
        Some(Self { l1, l2, u0, u1, u2 })
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = b.len();
        for i in 1..n {
            let mut v = b[i] - self.l1[i] * b[i - 1];
            if i >= 2 {
                v = v - self.l2[i] * b[i - 2];
            }
            b[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v = v - self.u1[i] * b[i + 1];
            }
            if i + 2 < n {
                v = v - self.u2[i] * b[i + 2];
            }
            b[i] = v / self.u0[i];
        }
    }
}

/// Diagonals of the Dirichlet five-point Laplacian `(-1, 16, -30, 16, -1) / 12 dx²`.
pub fn laplacian_diagonals(n: usize, dx: f64) -> [Vec<f64>; 5] {
    let h = 1.0 / (12.0 * dx * dx);
    [vec![-h; n], vec![16.0 * h; n], vec![-30.0 * h; n], vec![16.0 * h; n], vec![-h; n]]
}

/// Applies the Dirichlet five-point Laplacian (zero beyond the grid).
pub fn apply_laplacian<T>(f: &[T], dx: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = f.len();
    let h = 1.0 / (12.0 * dx * dx);
    (0..n)
        .map(|i| {
            let mut acc = f[i] * (-30.0);
            if i >= 1 {
                acc = acc + f[i - 1] * 16.0;
            }
            if i + 1 < n {
                acc = acc + f[i + 1] * 16.0;
            }
            if i >= 2 {
                acc = acc - f[i - 2];
            }
            if i + 2 < n {
                acc = acc - f[i + 2];
            }
            acc * h
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::UniformGrid;
    use num_complex::Complex64;

    #[test]
    fn stencils_exact_on_quartics() {
        let g = UniformGrid::spanning(-1.0, 1.0, 21).unwrap();
        let f: Vec<f64> = g.points().iter().map(|x| x * x * x * x - 2.0 * x).collect();
        let df = d1(&f, g.dx);
        let ddf = d2(&f, g.dx);
        for i in 2..19 {
            let x = g.x(i);
            assert!((df[i] - (4.0 * x * x * x - 2.0)).abs() < 1e-11);
            assert!((ddf[i] - 12.0 * x * x).abs() < 1e-9);
        }
        // boundary stencils are exact on quadratics
        let q: Vec<f64> = g.points().iter().map(|x| 3.0 * x * x - x).collect();
        let dq = d1(&q, g.dx);
        let ddq = d2(&q, g.dx);
        for i in [0, 1, 19, 20] {
            assert!((dq[i] - (6.0 * g.x(i) - 1.0)).abs() < 1e-11);
            assert!((ddq[i] - 6.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |n: usize| {
            let g = UniformGrid::spanning(0.0, 2.0, n).unwrap();
            let f: Vec<f64> = g.points().iter().map(|x| x.sin()).collect();
            let d = d2(&f, g.dx);
            (2..n - 2).map(|i| (d[i] + g.x(i).sin()).abs()).fold(0.0, f64::max)
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 14.0, "{ratio}");
    }

    #[test]
    fn antiderivative_and_integral() {
        let g = UniformGrid::spanning(0.0, 1.0, 101).unwrap();
        let f: Vec<f64> = g.points().iter().map(|x| 2.0 * x).collect();
        let a = antiderivative(&f, g.dx);
        assert_eq!(a[0], 0.0);
        assert!((a[100] - 1.0).abs() < 1e-12);
        assert!((integrate(&f, g.dx) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn banded_solver_matches_laplacian() {
        let n = 30;
        let dx = 0.1;
        let [m2, m1, d, p1, p2] = laplacian_diagonals(n, dx);
        // (I - L) x = b for a known x
        let shift = |v: &[f64], s: f64| v.iter().map(|a| s * a).collect::<Vec<_>>();
        let dd: Vec<f64> = d.iter().map(|a| 1.0 - a).collect();
        let lu = Banded5::factor(&shift(&m2, -1.0), &shift(&m1, -1.0), &dd, &shift(&p1, -1.0), &shift(&p2, -1.0)).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos()).collect();
        let lx = apply_laplacian(&x, dx);
        let mut b: Vec<f64> = x.iter().zip(&lx).map(|(a, l)| a - l).collect();
        lu.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_stencil() {
        let g = UniformGrid::spanning(0.0, 1.0, 50).unwrap();
        let f: Vec<Complex64> = g.points().iter().map(|&x| Complex64::new(x * x, x)).collect();
        let d = d2(&f, g.dx);
        assert!((d[25] - Complex64::new(2.0, 0.0)).norm() < 1e-9);
    }
}
