use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::PI;

use super::calculus::{antiderivative, d1, d2, integrate, MIN_POINTS};
use super::{WaveError, WavefunctionGrid};
use crate::numkit::UniformGrid;

/// Density floor relative to the peak density.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// Largest principal-value phase step between adjacent above-floor points
/// before the phase is considered unresolved.
pub const PHASE_STEP_LIMIT: f64 = PI / 2.0;

/// Hydrodynamic description of a state at one time.
///
/// `u = ν ∂ ln ρ`, `v = ħ ∂S`, `b = u + v`, `b_* = v - u`. `mask` marks points whose
/// density is above the floor together with their two neighbours on each side,
/// i.e. where every stencil touches resolved data.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroFields {
    pub grid: UniformGrid,
    pub t: f64,
    pub nu: f64,
    pub hbar: f64,
    pub rho: Vec<f64>,
    pub r: Vec<f64>,
    pub s_phase: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub b: Vec<f64>,
    pub b_star: Vec<f64>,
    pub mask: Vec<bool>,
}

fn erode(above: &[bool], reach: usize) -> Vec<bool> {
    let n = above.len();
    (0..n)
        .map(|i| i >= reach && i + reach < n && above[i - reach..=i + reach].iter().all(|&a| a))
        .collect()
}

impl HydroFields {
    /// Fields from an analytic log-density and current velocity; no flooring.
    ///
    /// `ln_rho` need not be normalized. The phase is `S = ∫v / ħ` from the left end.
    pub fn from_log_density(grid: UniformGrid, t: f64, nu: f64, hbar: f64, ln_rho: &[f64], v: &[f64]) -> Result<Self, WaveError> {
        if grid.n < MIN_POINTS || ln_rho.len() != grid.n || v.len() != grid.n {
            return Err(WaveError::InvalidParameter("fields must match a grid of at least 5 points"));
        }
        if !(nu >= 0.0 && hbar > 0.0) {
            return Err(WaveError::InvalidParameter("nu must be non-negative and hbar positive"));
        }
        if ln_rho.iter().chain(v).any(|a| !a.is_finite()) {
            return Err(WaveError::InvalidParameter("fields must be finite"));
        }
        let peak = ln_rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shifted: Vec<f64> = ln_rho.iter().map(|l| (l - peak).exp()).collect();
        let log_norm = peak + integrate(&shifted, grid.dx).ln();
        let ln_rho: Vec<f64> = ln_rho.iter().map(|l| l - log_norm).collect();
        let rho: Vec<f64> = ln_rho.iter().map(|l| l.exp()).collect();
        let s_phase: Vec<f64> = antiderivative(v, grid.dx).iter().map(|s| s / hbar).collect();
        let mut mask = vec![true; grid.n];
        mask = erode(&mask, 2);
        Ok(Self::assemble(grid, t, nu, hbar, rho, &ln_rho, s_phase, v.to_vec(), mask))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(grid: UniformGrid, t: f64, nu: f64, hbar: f64, rho: Vec<f64>, ln_rho: &[f64], s_phase: Vec<f64>, v: Vec<f64>, mask: Vec<bool>) -> Self {
        let r: Vec<f64> = ln_rho.iter().map(|l| 0.5 * l).collect();
        let u: Vec<f64> = d1(ln_rho, grid.dx).iter().map(|g| nu * g).collect();
        let b = u.iter().zip(&v).map(|(u, v)| u + v).collect();
        let b_star = u.iter().zip(&v).map(|(u, v)| v - u).collect();
        Self { grid, t, nu, hbar, rho, r, s_phase, u, v, b, b_star, mask }
    }

    /// Same state, different diffusion constant: `u` rescales, `v` is unchanged.
    pub fn with_nu(&self, nu: f64) -> Self {
        let ln_rho: Vec<f64> = self.r.iter().map(|r| 2.0 * r).collect();
        Self::assemble(self.grid, self.t, nu, self.hbar, self.rho.clone(), &ln_rho, self.s_phase.clone(), self.v.clone(), self.mask.clone())
    }

    pub fn ln_rho(&self) -> Vec<f64> {
        self.r.iter().map(|r| 2.0 * r).collect()
    }

    /// Index of the density peak (the phase and gauge reference point).
    pub fn reference_index(&self) -> usize {
        argmax(&self.rho)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.grid == other.grid
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, a) in v.iter().enumerate() {
        if *a > v[best] {
            best = i;
        }
    }
    best
}

fn wrap(d: f64) -> f64 {
    let w = d - 2.0 * PI * libm::round(d / (2.0 * PI));
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Unwraps `arg ψ` outward from `reference` (normally the density peak). Fails where two adjacent
/// above-floor points differ by more than [`PHASE_STEP_LIMIT`] (an unresolved phase).
pub(crate) fn unwrap_phase(w: &WavefunctionGrid, above: &[bool], reference: usize) -> Result<Vec<f64>, WaveError> {
    let n = w.psi.len();
    let i0 = reference;
    let mut s = vec![0.0; n];
    s[i0] = w.psi[i0].arg();
    let step = |from: usize, to: usize, s: &mut Vec<f64>| -> Result<(), WaveError> {
        let d = wrap(w.psi[to].arg() - w.psi[from].arg());
        if above[from] && above[to] && d.abs() > PHASE_STEP_LIMIT {
            return Err(WaveError::PhaseUnwrap { index: from.min(to) });
        }
        s[to] = s[from] + d;
        Ok(())
    };
    for i in i0 + 1..n {
        step(i - 1, i, &mut s)?;
    }
    for i in (0..i0).rev() {
        step(i + 1, i, &mut s)?;
    }
    Ok(s)
}

/// Floors `|ψ|²` at [`DENSITY_FLOOR`] times its peak, renormalizes, unwraps the
/// phase and differentiates. `v` is `ħ ∂S` (unit mass).
pub fn fields_from_wavefunction(w: &WavefunctionGrid, nu: f64) -> Result<HydroFields, WaveError> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(WaveError::InvalidParameter("nu must be non-negative"));
    }
    let raw = w.density();
    let peak = raw.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(WaveError::InvalidParameter("wavefunction vanishes"));
    }
    let floor = DENSITY_FLOOR * peak;
    let above: Vec<bool> = raw.iter().map(|r| *r > floor).collect();
    let floored: Vec<f64> = raw.iter().map(|r| r.max(floor)).collect();
    let total = integrate(&floored, w.grid.dx);
    let rho: Vec<f64> = floored.iter().map(|r| r / total).collect();
    let ln_rho: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
    let s_phase = unwrap_phase(w, &above, argmax(&raw))?;
    let v: Vec<f64> = d1(&s_phase, w.grid.dx).iter().map(|g| w.hbar * g).collect();
    let mask = erode(&above, 2);
    Ok(HydroFields::assemble(w.grid, w.t, nu, w.hbar, rho, &ln_rho, s_phase, v, mask))
}

/// `ν(β) = ħ / (2m) (1 - β/2)^(-1/2)`, the diffusion constant for which the
/// β-modified Euler-Lagrange equation is equivalent to Schrödinger's.
pub fn nu_from_beta(beta: f64, hbar: f64, m: f64) -> Result<f64, WaveError> {
    if !(beta < 2.0) {
        return Err(WaveError::BetaOutOfRange(beta));
    }
    if !(hbar > 0.0 && m > 0.0) {
        return Err(WaveError::InvalidParameter("hbar and m must be positive"));
    }
    if beta == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok(hbar / (2.0 * m) / (1.0 - 0.5 * beta).sqrt())
}

/// `coeff · (√ρ)'' / √ρ`, evaluated as `coeff · (R'' + R'^2)` with `R = ½ ln ρ`.
pub fn quantum_potential_term(rho: &[f64], coeff: f64, dx: f64) -> Result<Vec<f64>, WaveError> {
    if rho.iter().any(|r| !(*r > 0.0)) {
        return Err(WaveError::InvalidParameter("density must be positive (apply the floor first)"));
    }
    if coeff == 0.0 {
        return Ok(vec![0.0; rho.len()]);
    }
    let r: Vec<f64> = rho.iter().map(|p| 0.5 * p.ln()).collect();
    let r1 = d1(&r, dx);
    let r2 = d2(&r, dx);
    Ok(r1.iter().zip(&r2).map(|(a, b)| coeff * (b + a * a)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn ground(n: usize) -> WavefunctionGrid {
        let g = UniformGrid::spanning(-10.0, 10.0, n).unwrap();
        WavefunctionGrid::from_fn(g, 1.0, |x| Complex64::new((-x * x / 2.0).exp(), 0.0)).unwrap()
    }

    #[test]
    fn ground_state_fields() {
        let f = fields_from_wavefunction(&ground(1024), 0.5).unwrap();
        for i in (0..f.grid.n).filter(|&i| f.mask[i]) {
            let x = f.grid.x(i);
            assert!((f.u[i] + x).abs() < 1e-8, "u at {x}: {}", f.u[i]);
            assert!(f.v[i].abs() < 1e-12);
            assert!((f.b[i] + x).abs() < 1e-8);
            assert!((f.b_star[i] - x).abs() < 1e-8);
        }
        assert!((integrate(&f.rho, f.grid.dx) - 1.0).abs() < 1e-12);
        assert!(f.rho.iter().all(|r| *r > 0.0));
        // |x| > ~5.26 is below the floor
        assert!(!f.mask[0] && f.mask[f.grid.n / 2]);
    }

    #[test]
    fn plane_wave_velocity() {
        let g = UniformGrid::spanning(-10.0, 10.0, 1024).unwrap();
        let k = 1.7;
        let w = WavefunctionGrid::from_fn(g, 1.0, |x| Complex64::new(0.0, k * x).exp() * (-x * x / 2.0).exp()).unwrap();
        let f = fields_from_wavefunction(&w, 0.5).unwrap();
        for i in (0..g.n).filter(|&i| f.mask[i]) {
            assert!((f.v[i] - k).abs() < 1e-8);
            assert!((f.u[i] + g.x(i)).abs() < 1e-8);
        }
        let w2 = WavefunctionGrid { hbar: 2.0, ..w };
        let f2 = fields_from_wavefunction(&w2, 0.5).unwrap();
        assert!((f2.v[g.n / 2] - 2.0 * k).abs() < 1e-8);
    }

    #[test]
    fn doubling_nu_doubles_u() {
        let w = ground(256);
        let a = fields_from_wavefunction(&w, 0.5).unwrap();
        let b = fields_from_wavefunction(&w, 1.0).unwrap();
        for i in 0..256 {
            assert!((b.u[i] - 2.0 * a.u[i]).abs() < 1e-12);
            assert_eq!(a.v[i], b.v[i]);
        }
        assert_eq!(a.with_nu(1.0), b);
    }

    #[test]
    fn unresolved_phase_rejected() {
        let g = UniformGrid::spanning(-10.0, 10.0, 101).unwrap();
        // k dx = 10 * 0.2 = 2 > π/2
        let w = WavefunctionGrid::from_fn(g, 1.0, |x| Complex64::new(0.0, 10.0 * x).exp() * (-x * x / 8.0).exp()).unwrap();
        assert!(matches!(fields_from_wavefunction(&w, 0.5), Err(WaveError::PhaseUnwrap { .. })));
    }

    #[test]
    fn beta_map() {
        assert_eq!(nu_from_beta(0.0, 1.0, 1.0).unwrap(), 0.5);
        assert!((nu_from_beta(1.5, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(nu_from_beta(-1e12, 1.0, 1.0).unwrap() < 1e-6);
        assert_eq!(nu_from_beta(f64::NEG_INFINITY, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(nu_from_beta(2.0, 1.0, 1.0), Err(WaveError::BetaOutOfRange(2.0)));
        assert!(nu_from_beta(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn quantum_potential_examples() {
        let g = UniformGrid::spanning(-6.0, 6.0, 601).unwrap();
        let gauss: Vec<f64> = g.points().iter().map(|x| (-x * x).exp()).collect();
        let q = quantum_potential_term(&gauss, 1.0, g.dx).unwrap();
        for (i, x) in g.points().iter().enumerate().skip(2).take(596) {
            assert!((q[i] - (x * x - 1.0)).abs() < 1e-8);
        }
        let flat = vec![0.3; 601];
        assert!(quantum_potential_term(&flat, 2.0, g.dx).unwrap().iter().all(|a| a.abs() < 1e-12));
        assert!(quantum_potential_term(&gauss, 0.0, g.dx).unwrap().iter().all(|a| *a == 0.0));
        assert!(quantum_potential_term(&[0.0; 601], 1.0, g.dx).is_err());
    }

    proptest! {
        #[test]
        fn construction_identities(k in -2.0..2.0f64, c in -1.0..1.0f64, nu in 0.0..2.0f64) {
            let g = UniformGrid::spanning(-8.0, 8.0, 200).unwrap();
            let w = WavefunctionGrid::from_fn(g, 1.0, |x| Complex64::new(0.0, k * x + 0.2 * x * x).exp() * (-(x - c) * (x - c) / 2.0).exp()).unwrap();
            let f = fields_from_wavefunction(&w, nu).unwrap();
            for i in 0..g.n {
                prop_assert!((f.b[i] - f.b_star[i] - 2.0 * f.u[i]).abs() < 1e-12);
            }
            prop_assert!((integrate(&f.rho, g.dx) - 1.0).abs() < 1e-12);
        }
    }
}
