use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{inner, norm, ComplexMatrix, NumError, RngStream};

/// Construction used for a Haar-distributed unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HaarMethod {
    /// QR of a Ginibre matrix by Gram-Schmidt with the R-diagonal phase fix.
    GramSchmidt,
    /// Column k drawn uniformly from the unit sphere of the complement of columns 0..k.
    ColumnWise,
}

/// Standard complex normal: independent real and imaginary parts of variance 1/2.
pub fn complex_gaussian<R: RngCore + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unitary of dimension `n` from the given stream.
pub fn haar_unitary(n: usize, stream: RngStream, method: HaarMethod) -> Result<ComplexMatrix, NumError> {
    if n == 0 {
        return Err(NumError::ZeroDimension);
    }
    let mut rng = stream.rng();
    Ok(match method {
        HaarMethod::GramSchmidt => gram_schmidt(n, &mut rng),
        HaarMethod::ColumnWise => column_wise(n, &mut rng),
    })
}

fn gram_schmidt<R: RngCore>(n: usize, rng: &mut R) -> ComplexMatrix {
    let ginibre = ComplexMatrix::from_fn(n, |_, _| complex_gaussian(rng));
    let mut q = ComplexMatrix::zeros(n);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = ginibre.column(k);
        // two passes of modified Gram-Schmidt keep Q unitary to round-off
        for _ in 0..2 {
            for qj in &cols {
                let h = inner(qj, &v);
                for (vi, &qi) in v.iter_mut().zip(qj) {
                    *vi -= h * qi;
                }
            }
        }
        let r_kk = Complex64::new(norm(&v), 0.0);
        for vi in v.iter_mut() {
            *vi /= r_kk;
        }
        // Q <- Q diag(R_kk / |R_kk|)
        let phase = r_kk / r_kk.norm();
        for vi in v.iter_mut() {
            *vi *= phase;
        }
        q.set_column(k, &v);
        cols.push(v);
    }
    q
}

fn column_wise<R: RngCore>(n: usize, rng: &mut R) -> ComplexMatrix {
    let mut q = ComplexMatrix::zeros(n);
    // Orthonormal basis of the complement, stored as columns of an n x m block.
    let mut complement: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();
    for k in 0..n {
        let m = complement.len();
        let mut u: Vec<Complex64> = (0..m).map(|_| complex_gaussian(rng)).collect();
        let nu = norm(&u);
        u.iter_mut().for_each(|z| *z /= nu);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for (b, &c) in complement.iter().zip(&u) {
            for (ci, &bi) in col.iter_mut().zip(b) {
                *ci += bi * c;
            }
        }
        q.set_column(k, &col);
        if k + 1 == n {
            break;
        }
        // Householder H with H u = gamma e_1; columns 1.. of H span u^perp.
        let gamma = if u[0].norm() > 0.0 { -u[0] / u[0].norm() } else { Complex64::new(-1.0, 0.0) };
        let mut w = u.clone();
        w[0] -= gamma;
        let ww: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        let next: Vec<Vec<Complex64>> = (1..m)
            .map(|j| {
                // column j of H = e_j - 2 w conj(w_j) / ww
                let coef = w[j].conj() * (2.0 / ww);
                let mut h = vec![Complex64::new(0.0, 0.0); n];
                for (l, b) in complement.iter().enumerate() {
                    let hl = if l == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) } - w[l] * coef;
                    if hl.re == 0.0 && hl.im == 0.0 {
                        continue;
                    }
                    for (hi, &bi) in h.iter_mut().zip(b) {
                        *hi += bi * hl;
                    }
                }
                h
            })
            .collect();
        complement = next;
    }
    q
}
