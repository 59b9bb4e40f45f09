use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::EmergentError;
use crate::numkit::{hermitian_eigh, ComplexMatrix, UniformGrid};

/// Largest supported basis.
pub const MAX_BASIS: usize = 24;

/// Largest accepted condition number of the monomial Gram matrix.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

// orthonormality target of the finished basis
const GRAM_TOLERANCE: f64 = 1e-10;
// relative distance from a fitted Gaussian tolerated by the analytic Hermite basis
const GAUSSIAN_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Normalized probabilists' Hermite polynomials in `(x - μ)/σ`; needs a Gaussian density.
    HermiteAnalytic,
    /// Modified Gram-Schmidt (two passes) on the monomials `((x - μ)/σ)^k`.
    GramSchmidtMonomials,
}

/// Real functions tabulated on a grid, orthonormal under the density-weighted
/// trapezoid inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedBasis {
    pub grid: UniformGrid,
    pub rho: Vec<f64>,
    /// Quadrature weights `ρ_i dx` (halved at the ends).
    pub weights: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    /// `values[k][i]` is function `k` at grid point `i`.
    pub values: Vec<Vec<f64>>,
    /// First derivatives, same layout.
    pub derivatives: Vec<Vec<f64>>,
    pub gram: ComplexMatrix,
}

impl WeightedBasis {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }

    /// `max |G - I|`.
    pub fn gram_defect(&self) -> f64 {
        self.gram.max_abs_diff(&ComplexMatrix::identity(self.len()))
    }

    fn gram_of(weights: &[f64], values: &[Vec<f64>]) -> ComplexMatrix {
        let w = |f: &[f64], g: &[f64]| -> f64 { weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum() };
        let n = values.len();
        let mut upper = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                upper[i * n + j] = w(&values[i], &values[j]);
            }
        }
        super::real_matrix(n, |i, j| upper[i.min(j) * n + i.max(j)])
    }
}

/// Orthonormal polynomial basis for the weight `rho` (normalized to 1 on the grid).
pub fn build_basis(grid: UniformGrid, rho: &[f64], n_basis: usize, kind: BasisKind) -> Result<WeightedBasis, EmergentError> {
    if n_basis == 0 {
        return Err(EmergentError::InvalidParameter("n_basis must be positive"));
    }
    if n_basis > MAX_BASIS {
        return Err(EmergentError::BasisTooLarge(n_basis));
    }
    if rho.len() != grid.n || rho.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(EmergentError::InvalidParameter("rho must be finite, non-negative and match the grid"));
    }
    let mut weights: Vec<f64> = rho.iter().map(|r| r * grid.dx).collect();
    weights[0] *= 0.5;
    weights[grid.n - 1] *= 0.5;
    let mass: f64 = weights.iter().sum();
    if (mass - 1.0).abs() > 1e-6 {
        return Err(EmergentError::InvalidParameter("rho must be normalized"));
    }
    let xs = grid.points();
    let mean: f64 = weights.iter().zip(&xs).map(|(w, x)| w * x).sum();
    let var: f64 = weights.iter().zip(&xs).map(|(w, x)| w * (x - mean) * (x - mean)).sum();
    if !(var > 0.0) {
        return Err(EmergentError::InvalidParameter("rho has zero variance"));
    }
    let sd = var.sqrt();
    let xi: Vec<f64> = xs.iter().map(|x| (x - mean) / sd).collect();
    let (values, derivatives) = match kind {
        BasisKind::HermiteAnalytic => {
            let peak = rho.iter().copied().fold(0.0, f64::max);
            let norm = 1.0 / (sd * (2.0 * core::f64::consts::PI).sqrt());
            let deviation = xi.iter().zip(rho).map(|(z, r)| (r - norm * (-0.5 * z * z).exp()).abs()).fold(0.0, f64::max) / peak;
            if deviation > GAUSSIAN_TOLERANCE {
                return Err(EmergentError::NotGaussian { deviation });
            }
            hermite(&xi, sd, n_basis)
        }
        BasisKind::GramSchmidtMonomials => monomials_mgs(&weights, &xi, sd, n_basis)?,
    };
    let gram = WeightedBasis::gram_of(&weights, &values);
    let basis = WeightedBasis { grid, rho: rho.to_vec(), weights, mean, sd, values, derivatives, gram };
    let defect = basis.gram_defect();
    if defect > GRAM_TOLERANCE {
        return Err(EmergentError::GramDefect { defect });
    }
    Ok(basis)
}

// He_k(ξ)/√k! and its x-derivative √k He_{k-1}/√(k-1)! / σ
fn hermite(xi: &[f64], sd: f64, n: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = xi.len();
    let mut values = vec![vec![1.0; m]];
    if n > 1 {
        values.push(xi.to_vec());
    }
    for k in 2..n {
        // normalized recurrence: φ_k = (ξ φ_{k-1} - √(k-1) φ_{k-2}) / √k
        let (a, b) = (&values[k - 1], &values[k - 2]);
        let s = (k as f64).sqrt();
        let t = ((k - 1) as f64).sqrt();
        let next = (0..m).map(|i| (xi[i] * a[i] - t * b[i]) / s).collect();
        values.push(next);
    }
    let derivatives = (0..n)
        .map(|k| if k == 0 { vec![0.0; m] } else { values[k - 1].iter().map(|v| (k as f64).sqrt() * v / sd).collect() })
        .collect();
    (values, derivatives)
}

// (values, derivatives) per basis function
type Tabulated = (Vec<Vec<f64>>, Vec<Vec<f64>>);

fn monomials_mgs(weights: &[f64], xi: &[f64], sd: f64, n: usize) -> Result<Tabulated, EmergentError> {
    let m = xi.len();
    let mut mono: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut dmono: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        mono.push(xi.iter().map(|z| z.powi(k as i32)).collect());
        dmono.push(if k == 0 { vec![0.0; m] } else { xi.iter().map(|z| k as f64 * z.powi(k as i32 - 1) / sd).collect() });
    }
    let g = WeightedBasis::gram_of(weights, &mono);
    let eig = hermitian_eigh(&g)?;
    let lo = eig.values[0];
    let hi = *eig.values.last().unwrap();
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > MAX_GRAM_CONDITION {
        return Err(EmergentError::IllConditioned { condition });
    }
    let ip = |f: &[f64], g: &[f64]| -> f64 { weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum() };
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut derivs: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut f = mono[k].clone();
        let mut df = dmono[k].clone();
        for _pass in 0..2 {
            for j in 0..values.len() {
                let c = ip(&values[j], &f);
                for i in 0..m {
                    f[i] -= c * values[j][i];
                    df[i] -= c * derivs[j][i];
                }
            }
        }
        let nrm = ip(&f, &f).sqrt();
        // fix the sign so the leading coefficient is positive, matching Hermite
        f.iter_mut().for_each(|v| *v /= nrm);
        df.iter_mut().for_each(|v| *v /= nrm);
        values.push(f);
        derivs.push(df);
    }
    Ok((values, derivs))
}
