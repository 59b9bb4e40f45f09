use alloc::vec;
use alloc::vec::Vec;

use super::EmergentError;
use crate::numkit::{rk4_matrix_flow, ComplexMatrix};

/// `½ V̂² + Σ c_k X̂^k`, plus an optional extra term such as a quantum-potential matrix.
pub fn hamiltonian_operator(x_hat: &ComplexMatrix, v_hat: &ComplexMatrix, potential_coeffs: &[f64], extra: Option<&ComplexMatrix>) -> ComplexMatrix {
    let n = x_hat.dim();
    let mut h = (v_hat * v_hat).scale_real(0.5);
    let mut power = ComplexMatrix::identity(n);
    for (k, c) in potential_coeffs.iter().enumerate() {
        if k > 0 {
            power = &power * x_hat;
        }
        if *c != 0.0 {
            h = h.axpy(*c, &power);
        }
    }
    if let Some(e) = extra {
        h = &h + e;
    }
    h
}

/// Matrices `x̂(t)` and `v̂(t)` at every step of the flow `Ȯ = [Ĥ, Ô] / 2ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergFlow {
    pub t0: f64,
    pub dt: f64,
    pub nu: f64,
    pub h: ComplexMatrix,
    pub x: Vec<ComplexMatrix>,
    pub v: Vec<ComplexMatrix>,
}

impl HeisenbergFlow {
    pub fn steps(&self) -> usize {
        self.x.len() - 1
    }

    pub fn time(&self, step: usize) -> f64 {
        self.t0 + step as f64 * self.dt
    }

    pub fn step_of(&self, t: f64) -> Result<usize, EmergentError> {
        let s = (t - self.t0) / self.dt;
        let k = libm::round(s);
        if !(k >= 0.0 && k <= self.steps() as f64 && (s - k).abs() < 1e-6) {
            return Err(EmergentError::OffGrid(t));
        }
        Ok(k as usize)
    }

    pub fn x_at(&self, t: f64) -> Result<&ComplexMatrix, EmergentError> {
        Ok(&self.x[self.step_of(t)?])
    }

    /// `(1, Ĥ(t) 1)` with `Ĥ(t) = ½ v̂(t)² + Σ c_k x̂(t)^k`; conserved by the flow.
    pub fn energy(&self, step: usize, potential_coeffs: &[f64]) -> f64 {
        let h = hamiltonian_operator(&self.x[step], &self.v[step], potential_coeffs, None);
        h[(0, 0)].re
    }
}

pub fn heisenberg_flow(x_hat: &ComplexMatrix, v_hat: &ComplexMatrix, h: &ComplexMatrix, nu: f64, t0: f64, dt: f64, steps: usize) -> Result<HeisenbergFlow, EmergentError> {
    if !(nu > 0.0) {
        return Err(EmergentError::InvalidParameter("nu must be positive"));
    }
    if x_hat.dim() != v_hat.dim() || h.dim() != x_hat.dim() {
        return Err(EmergentError::InvalidParameter("operators differ in dimension"));
    }
    let k = 1.0 / (2.0 * nu);
    let traj = rk4_matrix_flow(|_, s: &[ComplexMatrix]| s.iter().map(|o| h.commutator(o).scale_real(k)).collect(), vec![x_hat.clone(), v_hat.clone()], t0, dt, steps)?;
    let (mut x, mut v) = (Vec::with_capacity(traj.len()), Vec::with_capacity(traj.len()));
    for mut s in traj {
        v.push(s.pop().unwrap());
        x.push(s.pop().unwrap());
    }
    Ok(HeisenbergFlow { t0, dt, nu, h: h.clone(), x, v })
}

/// `(1, x̂(t_1) x̂(t_2) ⋯ x̂(t_n) 1)` with the factors sorted so the earliest time is leftmost.
pub fn time_ordered_moment(flow: &HeisenbergFlow, times: &[f64]) -> Result<f64, EmergentError> {
    let n = flow.h.dim();
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut vec = vec![crate::Complex64::new(0.0, 0.0); n];
    vec[0] = 1.0.into();
    // apply right to left, latest first
    for &t in sorted.iter().rev() {
        vec = flow.x_at(t)?.mul_vec(&vec);
    }
    Ok(vec[0].re)
}
