use alloc::string::String;
use alloc::vec::Vec;

use super::{real_matrix, EmergentError, WeightedBasis};
use crate::numkit::ComplexMatrix;
use crate::waveengine::calculus::{antiderivative, d1, d2, integrate};
use crate::waveengine::{HydroFields, TimeField};

/// A real operator in the weighted basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub label: String,
    pub matrix: ComplexMatrix,
}

impl OperatorMatrix {
    pub fn new(label: &str, matrix: ComplexMatrix) -> Self {
        Self { label: label.into(), matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet {
    /// Multiplication by `x`.
    pub x_hat: OperatorMatrix,
    /// `f ↦ b f + 2ν f'`.
    pub v_hat: OperatorMatrix,
    /// `f ↦ b_* f − 2ν f'`, built directly rather than by transposition.
    pub v_hat_adjoint: OperatorMatrix,
}

impl OperatorSet {
    /// `max |V̂ᵀ − V̂†|` where `V̂†` is the directly built backward operator.
    pub fn adjoint_defect(&self) -> f64 {
        self.v_hat.matrix.transpose().max_abs_diff(&self.v_hat_adjoint.matrix)
    }
}

fn check_grid(basis: &WeightedBasis, fields: &HydroFields) -> Result<(), EmergentError> {
    if basis.grid != fields.grid {
        return Err(EmergentError::GridMismatch);
    }
    Ok(())
}

fn project(basis: &WeightedBasis, apply: impl Fn(usize) -> Vec<f64>) -> ComplexMatrix {
    let n = basis.len();
    let images: Vec<Vec<f64>> = (0..n).map(apply).collect();
    real_matrix(n, |i, j| basis.inner(&basis.values[i], &images[j]))
}

/// Matrix of multiplication by a tabulated function.
pub fn multiplication_operator(basis: &WeightedBasis, field: &[f64], label: &str) -> Result<OperatorMatrix, EmergentError> {
    if field.len() != basis.grid.n {
        return Err(EmergentError::GridMismatch);
    }
    let m = project(basis, |j| basis.values[j].iter().zip(field).map(|(f, g)| f * g).collect());
    Ok(OperatorMatrix::new(label, m))
}

pub fn operator_matrices(basis: &WeightedBasis, fields: &HydroFields) -> Result<OperatorSet, EmergentError> {
    check_grid(basis, fields)?;
    let nu = fields.nu;
    let xs = basis.grid.points();
    let x_hat = multiplication_operator(basis, &xs, "x")?;
    let v = project(basis, |j| {
        let (f, df) = (&basis.values[j], &basis.derivatives[j]);
        (0..f.len()).map(|i| fields.b[i] * f[i] + 2.0 * nu * df[i]).collect()
    });
    let va = project(basis, |j| {
        let (f, df) = (&basis.values[j], &basis.derivatives[j]);
        (0..f.len()).map(|i| fields.b_star[i] * f[i] - 2.0 * nu * df[i]).collect()
    });
    Ok(OperatorSet { x_hat, v_hat: OperatorMatrix::new("v", v), v_hat_adjoint: OperatorMatrix::new("v_adjoint", va) })
}

/// `max |([V̂, X̂] − 2ν I)_{jk}|` over the leading `block × block` corner.
pub fn commutator_block(v_hat: &ComplexMatrix, x_hat: &ComplexMatrix, nu: f64, block: usize) -> Result<f64, EmergentError> {
    let n = v_hat.dim();
    if x_hat.dim() != n {
        return Err(EmergentError::InvalidParameter("operators differ in dimension"));
    }
    if block == 0 || block + 2 > n {
        return Err(EmergentError::InvalidParameter("block must leave a truncation margin of two"));
    }
    let c = v_hat.commutator(x_hat);
    let mut worst = 0.0_f64;
    for i in 0..block {
        for j in 0..block {
            let target = if i == j { 2.0 * nu } else { 0.0 };
            worst = worst.max((c[(i, j)] - target).norm());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccelerationPotential {
    /// `∂t b + ν b'' + ½ (b²)'`.
    pub a: Vec<f64>,
    /// `−∫ a`, zero at the left end of the grid.
    pub u: Vec<f64>,
}

/// Acceleration field and stochastic potential at `slices[k]`. A single slice is stationary.
pub fn acceleration_and_potential(slices: &[HydroFields], k: usize) -> Result<AccelerationPotential, EmergentError> {
    let at = slices.get(k).ok_or(EmergentError::InvalidParameter("slice index out of range"))?;
    if slices.iter().any(|s| !s.same_grid(at)) {
        return Err(EmergentError::GridMismatch);
    }
    let dx = at.grid.dx;
    let db_dt = if slices.len() == 1 {
        alloc::vec![0.0; at.grid.n]
    } else {
        TimeField::from_slices(slices.iter().map(|s| s.t).collect(), slices.iter().map(|s| s.b.clone()).collect())?.time_derivative(at.t)
    };
    let b2: Vec<f64> = at.b.iter().map(|b| b * b).collect();
    let db2 = d1(&b2, dx);
    let bpp = d2(&at.b, dx);
    let a: Vec<f64> = (0..at.grid.n).map(|i| db_dt[i] + at.nu * bpp[i] + 0.5 * db2[i]).collect();
    let u = antiderivative(&a, dx).iter().map(|s| -s).collect();
    Ok(AccelerationPotential { a, u })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianForms {
    /// `∫ρ (½(b² + 2ν b') + U)`, the expanded `(1, (½ v̂² + U) 1)`.
    pub form_67: f64,
    /// `∫ρ (½ b b_* + U)`.
    pub form_68: f64,
    /// `∫ρ (½(v² − u²) + U)`.
    pub form_70: f64,
}

impl HamiltonianForms {
    pub fn spread(&self) -> f64 {
        let v = [self.form_67, self.form_68, self.form_70];
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn hamiltonian_expectation(fields: &HydroFields, potential: &[f64]) -> Result<HamiltonianForms, EmergentError> {
    let n = fields.grid.n;
    if potential.len() != n {
        return Err(EmergentError::GridMismatch);
    }
    let dx = fields.grid.dx;
    let db = d1(&fields.b, dx);
    let rho = &fields.rho;
    let q = |f: &dyn Fn(usize) -> f64| -> f64 {
        let g: Vec<f64> = (0..n).map(|i| rho[i] * (f(i) + potential[i])).collect();
        integrate(&g, dx)
    };
    let (b, bs, u, v) = (&fields.b, &fields.b_star, &fields.u, &fields.v);
    Ok(HamiltonianForms {
        form_67: q(&|i| 0.5 * (b[i] * b[i] + 2.0 * fields.nu * db[i])),
        form_68: q(&|i| 0.5 * b[i] * bs[i]),
        form_70: q(&|i| 0.5 * (v[i] * v[i] - u[i] * u[i])),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::emergent::{build_basis, BasisKind};
    use crate::numkit::UniformGrid;

    /// Wiener process started at 0, seen at `t0`: ρ = N(0, 2ν t0), b = 0, b_* = x/t0.
    pub(crate) fn wiener_fields(nu: f64, t0: f64, n: usize) -> (WeightedBasis, HydroFields, usize) {
        let s = (2.0 * nu * t0).sqrt();
        let g = UniformGrid::spanning(-14.0 * s, 14.0 * s, 2801).unwrap();
        let xs = g.points();
        let ln_rho: Vec<f64> = xs.iter().map(|x| -x * x / (4.0 * nu * t0)).collect();
        let v: Vec<f64> = xs.iter().map(|x| x / (2.0 * t0)).collect();
        let f = HydroFields::from_log_density(g, t0, nu, 1.0, &ln_rho, &v).unwrap();
        let basis = build_basis(g, &f.rho, n, BasisKind::HermiteAnalytic).unwrap();
        (basis, f, n)
    }

    #[test]
    fn wiener_operators() {
        let (basis, f, n) = wiener_fields(0.5, 1.0, 20);
        let ops = operator_matrices(&basis, &f).unwrap();
        assert!(ops.x_hat.matrix.max_asymmetry() < 1e-10);
        assert_eq!(ops.x_hat.matrix.max_imag(), 0.0);
        // V̂ 1 = 0
        for i in 0..n {
            assert!(ops.v_hat.matrix[(i, 0)].norm() < 1e-12);
        }
        // Hermite recurrence: x φ_k = μ φ_k + σ(√(k+1) φ_{k+1} + √k φ_{k−1})
        let sd = basis.sd;
        for i in 0..n {
            for j in 0..n {
                let want = if i + 1 == j { sd * (j as f64).sqrt() } else if j + 1 == i { sd * (i as f64).sqrt() } else { 0.0 };
                assert!((ops.x_hat.matrix[(i, j)].re - want).abs() < 1e-9, "x[{i},{j}]");
            }
        }
        assert!(ops.adjoint_defect() < 1e-8, "{}", ops.adjoint_defect());
        assert!(commutator_block(&ops.v_hat.matrix, &ops.x_hat.matrix, 0.5, 10).unwrap() <= 1e-8);
        assert!(commutator_block(&ops.v_hat.matrix, &ops.x_hat.matrix, 0.5, 18).unwrap() <= 1e-8);
        // full matrix: traceless commutator, defect concentrated at the corner
        let c = ops.v_hat.matrix.commutator(&ops.x_hat.matrix);
        assert!(c.trace().norm() < 1e-8);
        assert!((c[(n - 1, n - 1)].re - (1.0 - n as f64)).abs() < 1e-8);
        assert!(commutator_block(&ops.v_hat.matrix, &ops.x_hat.matrix, 0.5, 19).is_err());
    }

    #[test]
    fn commutator_vanishes_without_diffusion() {
        let (basis, f, _) = wiener_fields(0.5, 1.0, 12);
        let ops = operator_matrices(&basis, &f.with_nu(0.0)).unwrap();
        assert!(commutator_block(&ops.v_hat.matrix, &ops.x_hat.matrix, 0.0, 10).unwrap() < 1e-10);
    }

    pub(crate) fn ou_fields(nu: f64, n: usize) -> HydroFields {
        // stationary OU with b = −x: ρ = N(0, ν), v = 0
        let s = nu.sqrt();
        let g = UniformGrid::spanning(-14.0 * s, 14.0 * s, n).unwrap();
        let ln_rho: Vec<f64> = g.points().iter().map(|x| -x * x / (2.0 * nu)).collect();
        HydroFields::from_log_density(g, 0.0, nu, 1.0, &ln_rho, &alloc::vec![0.0; n]).unwrap()
    }

    #[test]
    fn ou_acceleration_and_potential() {
        let f = ou_fields(0.5, 1401);
        let ap = acceleration_and_potential(core::slice::from_ref(&f), 0).unwrap();
        let x0 = f.grid.x(0);
        // b is itself a stencil of ln ρ, so ν b'' carries rounding of order ε |ln ρ| / dx³
        for (i, x) in f.grid.points().iter().enumerate() {
            assert!((ap.a[i] - x).abs() < 1e-7, "{i} {} {x}", ap.a[i]);
            assert!((ap.u[i] - (x0 * x0 - x * x) / 2.0).abs() < 1e-8);
        }
        let adj = operator_matrices(&build_basis(f.grid, &f.rho, 10, BasisKind::HermiteAnalytic).unwrap(), &f).unwrap();
        assert!(adj.adjoint_defect() < 1e-8);
    }

    #[test]
    fn ground_state_potential_matches_quantum_form() {
        // ħ = 1, ω = 1, ν = ½: U = V − ħ² (√ρ)''/√ρ + const = x²/2 − (x² − 1) = −x²/2 + 1
        let f = ou_fields(0.5, 1401);
        let ap = acceleration_and_potential(core::slice::from_ref(&f), 0).unwrap();
        let q = crate::waveengine::quantum_potential_term(&f.rho, 1.0, f.grid.dx).unwrap();
        let xs = f.grid.points();
        let other: Vec<f64> = xs.iter().zip(&q).map(|(x, q)| 0.5 * x * x - q).collect();
        let mid = xs.len() / 2;
        let shift = ap.u[mid] - other[mid];
        for i in (0..xs.len()).filter(|&i| xs[i].abs() < 4.0) {
            assert!((ap.u[i] - other[i] - shift).abs() < 1e-6, "{i}");
        }
    }

    #[test]
    fn zero_drift_has_no_acceleration() {
        let g = UniformGrid::spanning(-3.0, 3.0, 301).unwrap();
        let f = HydroFields::from_log_density(g, 0.0, 0.0, 1.0, &alloc::vec![0.0; 301], &alloc::vec![0.0; 301]).unwrap();
        let ap = acceleration_and_potential(&[f], 0).unwrap();
        assert!(ap.a.iter().chain(&ap.u).all(|v| *v == 0.0));
    }

    #[test]
    fn time_dependent_acceleration() {
        // Wiener: b = 0 at every time, so a = 0 even though ρ spreads
        let slices: Vec<HydroFields> = [0.9, 1.0, 1.1].iter().map(|&t| wiener_fields(0.5, t, 4).1).collect();
        // grids differ with t, so these slices are rejected
        assert_eq!(acceleration_and_potential(&slices, 1).unwrap_err(), EmergentError::GridMismatch);
        let g = slices[1].grid;
        let same: Vec<HydroFields> = [0.9, 1.0, 1.1]
            .iter()
            .map(|&t| {
                let xs = g.points();
                let ln: Vec<f64> = xs.iter().map(|x| -x * x / (2.0 * t)).collect();
                let v: Vec<f64> = xs.iter().map(|x| x / (2.0 * t)).collect();
                HydroFields::from_log_density(g, t, 0.5, 1.0, &ln, &v).unwrap()
            })
            .collect();
        let ap = acceleration_and_potential(&same, 1).unwrap();
        assert!(ap.a.iter().all(|a| a.abs() < 1e-7));
    }

    #[test]
    fn hamiltonian_forms_agree() {
        let f = ou_fields(0.5, 1401);
        let pot: Vec<f64> = f.grid.points().iter().map(|x| -x * x / 2.0).collect();
        let h = hamiltonian_expectation(&f, &pot).unwrap();
        assert!(h.spread() < 1e-8, "{h:?}");
        // v = 0: −½⟨u²⟩ + ⟨U⟩ = −¼·... with u = −x, ⟨x²⟩ = ½
        assert!((h.form_70 - (-0.25 - 0.25)).abs() < 1e-10);
        // moving OU state: v ≠ 0
        let g = f.grid;
        let xs = g.points();
        let ln: Vec<f64> = xs.iter().map(|x| -(x - 0.3) * (x - 0.3)).collect();
        let v: Vec<f64> = xs.iter().map(|x| 0.2 + 0.1 * x).collect();
        let m = HydroFields::from_log_density(g, 0.0, 0.5, 1.0, &ln, &v).unwrap();
        let h = hamiltonian_expectation(&m, &pot).unwrap();
        assert!(h.spread() < 1e-8, "{h:?}");
        // u ≡ 0: classical energy
        let c = m.with_nu(0.0);
        let h = hamiltonian_expectation(&c, &pot).unwrap();
        let classical: Vec<f64> = (0..g.n).map(|i| c.rho[i] * (0.5 * v[i] * v[i] + pot[i])).collect();
        assert!((h.form_70 - integrate(&classical, g.dx)).abs() < 1e-12);
    }
}
