use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{trace_derivative, trace_eval, MatrixPolynomial, Symbol, TraceError, TracePolynomial};
use crate::numkit::{complex_gaussian, rk4_matrix_flow, ComplexMatrix, RngStream};
use crate::Complex64;

/// `R` pairs of `N × N` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePhaseSpace {
    pub q: Vec<ComplexMatrix>,
    pub p: Vec<ComplexMatrix>,
}

impl TracePhaseSpace {
    pub fn new(q: Vec<ComplexMatrix>, p: Vec<ComplexMatrix>) -> Result<Self, TraceError> {
        if q.is_empty() || q.len() != p.len() {
            return Err(TraceError::Shape);
        }
        let n = q[0].dim();
        if n == 0 || q.iter().chain(&p).any(|m| m.dim() != n) {
            return Err(TraceError::Shape);
        }
        let s = Self { q, p };
        if !s.is_finite() {
            return Err(TraceError::NonFinite);
        }
        Ok(s)
    }

    /// Random state with complex Gaussian entries of variance `1/N`; Hermitian parts only
    /// when `hermitian` is set.
    pub fn random(stream: RngStream, r: usize, dim: usize, hermitian: bool) -> Self {
        let mut rng = stream.rng();
        let scale = 1.0 / (dim as f64).sqrt();
        let mut draw = || {
            let g = ComplexMatrix::from_fn(dim, |_, _| complex_gaussian(&mut rng) * scale);
            if hermitian {
                (&g + &g.adjoint()).scale_real(core::f64::consts::FRAC_1_SQRT_2)
            } else {
                g
            }
        };
        let q = (0..r).map(|_| draw()).collect();
        let p = (0..r).map(|_| draw()).collect();
        Self { q, p }
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }

    pub fn dim(&self) -> usize {
        self.q[0].dim()
    }

    pub fn get(&self, s: Symbol) -> &ComplexMatrix {
        match s {
            Symbol::Q(r) => &self.q[r],
            Symbol::P(r) => &self.p[r],
        }
    }

    pub fn get_mut(&mut self, s: Symbol) -> &mut ComplexMatrix {
        match s {
            Symbol::Q(r) => &mut self.q[r],
            Symbol::P(r) => &mut self.p[r],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.p).all(|m| m.is_finite())
    }

    pub fn is_hermitian(&self) -> bool {
        self.q.iter().chain(&self.p).all(|m| m.is_hermitian())
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.q.iter().chain(&self.p).map(|m| m.max_asymmetry()).fold(0.0, f64::max)
    }

    fn flatten(&self) -> Vec<ComplexMatrix> {
        self.q.iter().chain(&self.p).cloned().collect()
    }

    fn unflatten(mut v: Vec<ComplexMatrix>) -> Self {
        let p = v.split_off(v.len() / 2);
        Self { q: v, p }
    }
}

/// `C̃ = Σ_r [q_r, p_r]`.
pub fn millard_charge(state: &TracePhaseSpace) -> ComplexMatrix {
    let mut c = ComplexMatrix::zeros(state.dim());
    for (q, p) in state.q.iter().zip(&state.p) {
        c = &c + &q.commutator(p);
    }
    c
}

/// `Tr Σ_r (δA/δq_r · δB/δp_r − δB/δq_r · δA/δp_r)`.
pub fn trace_poisson_bracket(a: &TracePolynomial, b: &TracePolynomial, state: &TracePhaseSpace) -> Result<Complex64, TraceError> {
    a.check(state)?;
    b.check(state)?;
    let mut total = Complex64::new(0.0, 0.0);
    for r in 0..state.dof() {
        let d = |poly: &TracePolynomial, s: Symbol| trace_derivative(poly, s).eval(state);
        let (aq, ap) = (d(a, Symbol::Q(r)), d(a, Symbol::P(r)));
        let (bq, bp) = (d(b, Symbol::Q(r)), d(b, Symbol::P(r)));
        total += (&aq * &bp).trace() - (&bq * &ap).trace();
    }
    Ok(total)
}

/// Trajectory of the trace Hamilton equations `q̇_r = δH/δp_r`, `ṗ_r = −δH/δq_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFlow {
    pub hamiltonian: TracePolynomial,
    pub t0: f64,
    pub dt: f64,
    pub states: Vec<TracePhaseSpace>,
}

impl TraceFlow {
    pub fn time(&self, step: usize) -> f64 {
        self.t0 + step as f64 * self.dt
    }

    /// `Tr H` at every stored step.
    pub fn energies(&self) -> Vec<Complex64> {
        self.states.iter().map(|s| trace_eval(&self.hamiltonian, s).expect("checked at construction")).collect()
    }

    pub fn millard(&self) -> Vec<ComplexMatrix> {
        self.states.iter().map(millard_charge).collect()
    }

    pub fn max_energy_drift(&self) -> f64 {
        let e = self.energies();
        e.iter().map(|x| (x - e[0]).norm()).fold(0.0, f64::max)
    }

    /// `max_t ‖C̃(t) − C̃(0)‖_F`.
    pub fn max_millard_drift(&self) -> f64 {
        let c = self.millard();
        c.iter().map(|m| (m - &c[0]).frobenius_norm()).fold(0.0, f64::max)
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.states.iter().map(|s| s.max_asymmetry()).fold(0.0, f64::max)
    }
}

pub fn hamilton_flow(h: &TracePolynomial, state0: &TracePhaseSpace, dt: f64, steps: usize) -> Result<TraceFlow, TraceError> {
    h.check(state0)?;
    let r = state0.dof();
    let dq: Vec<MatrixPolynomial> = (0..r).map(|k| trace_derivative(h, Symbol::Q(k))).collect();
    let dp: Vec<MatrixPolynomial> = (0..r).map(|k| trace_derivative(h, Symbol::P(k))).collect();
    let rhs = |_: f64, s: &[ComplexMatrix]| -> Vec<ComplexMatrix> {
        let st = TracePhaseSpace::unflatten(s.to_vec());
        let mut out: Vec<ComplexMatrix> = dp.iter().map(|d| d.eval(&st)).collect();
        out.extend(dq.iter().map(|d| d.eval(&st).scale_real(-1.0)));
        out
    };
    let traj = rk4_matrix_flow(rhs, state0.flatten(), 0.0, dt, steps)?;
    Ok(TraceFlow { hamiltonian: h.clone(), t0: 0.0, dt, states: traj.into_iter().map(TracePhaseSpace::unflatten).collect() })
}
