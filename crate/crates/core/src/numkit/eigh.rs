use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{ComplexMatrix, NumError};

/// Maximum number of cyclic Jacobi sweeps before giving up.
pub const JACOBI_SWEEP_CAP: usize = 100;

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl Eigh {
    /// `Q diag(f(lambda)) Q^H`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<Complex64> = self.values.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * fv[k] * self.vectors[(j, k)].conj())
                .sum()
        })
    }
}

/// Cyclic Jacobi on a Hermitian matrix.
///
/// Each rotation first removes the phase of `a_pq` with a diagonal unitary and
/// then applies the real symmetric Jacobi rotation, so one 2x2 unitary
/// `V = D G` annihilates the pair. Eigenvalues come back ascending.
pub fn hermitian_eigh(m: &ComplexMatrix) -> Result<Eigh, NumError> {
    let n = m.dim();
    if n == 0 {
        return Err(NumError::ZeroDimension);
    }
    let max_asymmetry = m.max_asymmetry();
    if !(max_asymmetry <= super::HERMITIAN_TOL) {
        return Err(NumError::NotHermitian { max_asymmetry });
    }

    // Symmetrize exactly so the rotations see a Hermitian matrix.
    let mut a = ComplexMatrix::from_fn(n, |i, j| {
        if i == j {
            Complex64::new(m[(i, i)].re, 0.0)
        } else {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }
    });
    let mut q = ComplexMatrix::identity(n);
    let fro = a.frobenius_norm();
    let eps = f64::EPSILON;

    let mut converged = n == 1 || fro == 0.0;
    let mut sweep = 0;
    while !converged && sweep < JACOBI_SWEEP_CAP {
        sweep += 1;
        let mut rotated = false;
        for p in 0..n - 1 {
            for r in p + 1..n {
                let apq = a[(p, r)];
                let mag = apq.norm();
                let app = a[(p, p)].re;
                let arr = a[(r, r)].re;
                if mag <= 0.5 * eps * (app.abs() * arr.abs()).sqrt() || mag <= 1e-18 * fro {
                    continue;
                }
                rotated = true;
                // w = e^{-i phi} where a_pq = |a_pq| e^{i phi}
                let w = apq.conj() / mag;
                let theta = (arr - app) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let sw = w * s;
                let cw = w * c;
                // A <- A V (columns p, r)
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akr = a[(k, r)];
                    a[(k, p)] = akp * c - akr * sw;
                    a[(k, r)] = akp * s + akr * cw;
                }
                // A <- V^H A (rows p, r)
                for k in 0..n {
                    let apk = a[(p, k)];
                    let ark = a[(r, k)];
                    a[(p, k)] = apk * c - ark * sw.conj();
                    a[(r, k)] = apk * s + ark * cw.conj();
                }
                a[(p, r)] = Complex64::new(0.0, 0.0);
                a[(r, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(app - t * mag, 0.0);
                a[(r, r)] = Complex64::new(arr + t * mag, 0.0);
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = qkp * c - qkr * sw;
                    q[(k, r)] = qkp * s + qkr * cw;
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)].norm_sqr();
                }
            }
        }
        return Err(NumError::NoConvergence { off_norm: off.sqrt() });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, j| q[(i, order[j])]);
    Ok(Eigh { values, vectors })
}
