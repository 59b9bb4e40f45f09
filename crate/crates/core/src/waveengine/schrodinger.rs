use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use super::calculus::{apply_laplacian, integrate, laplacian_diagonals, Banded5, MIN_POINTS};
use super::WaveError;
use crate::numkit::UniformGrid;

/// Largest tolerated relative change of `∫|ψ|²` over a run.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Complex wavefunction on a uniform grid at time `t` (unit mass).
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionGrid {
    pub grid: UniformGrid,
    pub psi: Vec<Complex64>,
    pub t: f64,
    pub hbar: f64,
}

impl WavefunctionGrid {
    pub fn new(grid: UniformGrid, psi: Vec<Complex64>, t: f64, hbar: f64) -> Result<Self, WaveError> {
        if grid.n < MIN_POINTS || psi.len() != grid.n {
            return Err(WaveError::InvalidParameter("psi must match a grid of at least 5 points"));
        }
        if !(hbar > 0.0) {
            return Err(WaveError::InvalidParameter("hbar must be positive"));
        }
        if psi.iter().any(|z| !z.is_finite()) {
            return Err(WaveError::InvalidParameter("psi must be finite"));
        }
        Ok(Self { grid, psi, t, hbar })
    }

    /// Samples `f` on the grid and normalizes.
    pub fn from_fn(grid: UniformGrid, hbar: f64, f: impl Fn(f64) -> Complex64) -> Result<Self, WaveError> {
        let psi = grid.points().into_iter().map(f).collect();
        Self::new(grid, psi, 0.0, hbar)?.normalized()
    }

    pub fn norm_sq(&self) -> f64 {
        integrate(&self.density(), self.grid.dx)
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn normalized(mut self) -> Result<Self, WaveError> {
        let n = self.norm_sq();
        if !(n > 0.0) {
            return Err(WaveError::InvalidParameter("wavefunction has zero norm"));
        }
        let s = n.sqrt().recip();
        self.psi.iter_mut().for_each(|z| *z *= s);
        Ok(self)
    }
}

/// Crank-Nicolson propagator for `[-ħ²/2 Δ + V] ψ = iħ ∂t ψ` with the five-point
/// Laplacian and zero Dirichlet data beyond the grid.
#[derive(Debug, Clone)]
pub struct SchrodingerSolver {
    grid: UniformGrid,
    hbar: f64,
    dt: f64,
    potential: Vec<f64>,
    lhs: Banded5<Complex64>,
}

impl SchrodingerSolver {
    pub fn new(grid: UniformGrid, potential: &[f64], hbar: f64, dt: f64) -> Result<Self, WaveError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(WaveError::InvalidParameter("dt must be positive"));
        }
        if potential.len() != grid.n || potential.iter().any(|v| !v.is_finite()) {
            return Err(WaveError::InvalidParameter("potential must be finite and match the grid"));
        }
        if grid.n < MIN_POINTS {
            return Err(WaveError::InvalidParameter("grid too small"));
        }
        // A = I + i dt/(2ħ) H with H = -ħ²/2 L + V
        let [m2, m1, d, p1, p2] = laplacian_diagonals(grid.n, grid.dx);
        let k = Complex64::new(0.0, dt / (2.0 * hbar));
        let kin = -0.5 * hbar * hbar;
        let off = |v: &[f64]| v.iter().map(|a| k * (kin * a)).collect::<Vec<_>>();
        let diag: Vec<Complex64> = d.iter().zip(potential).map(|(a, v)| Complex64::new(1.0, 0.0) + k * (kin * a + v)).collect();
        let lhs = Banded5::factor(&off(&m2), &off(&m1), &diag, &off(&p1), &off(&p2)).ok_or(WaveError::InvalidParameter("singular Crank-Nicolson matrix"))?;
        Ok(Self { grid, hbar, dt, potential: potential.to_vec(), lhs })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `H ψ`.
    pub fn apply_hamiltonian(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let lap = apply_laplacian(psi, self.grid.dx);
        let kin = -0.5 * self.hbar * self.hbar;
        lap.iter().zip(psi).zip(&self.potential).map(|((l, p), v)| l * kin + p * v).collect()
    }

    pub fn step(&self, psi: &mut [Complex64]) {
        let h = self.apply_hamiltonian(psi);
        let k = Complex64::new(0.0, self.dt / (2.0 * self.hbar));
        psi.iter_mut().zip(&h).for_each(|(p, hp)| *p -= k * hp);
        self.lhs.solve_in_place(psi);
    }

    fn check(&self, w: &WavefunctionGrid) -> Result<(), WaveError> {
        if w.grid != self.grid || w.hbar != self.hbar {
            return Err(WaveError::GridMismatch);
        }
        Ok(())
    }

    /// Advances `steps` steps, checking the norm after each one.
    pub fn evolve(&self, w: &WavefunctionGrid, steps: usize) -> Result<WavefunctionGrid, WaveError> {
        let mut out = Vec::new();
        self.run(w, steps, 0, &mut out).map(|last| last.expect("final state always returned"))
    }

    // keeps every `every`-th state in `out` (none when every == 0) and returns the final one
    fn run(&self, w: &WavefunctionGrid, steps: usize, every: usize, out: &mut Vec<WavefunctionGrid>) -> Result<Option<WavefunctionGrid>, WaveError> {
        self.check(w)?;
        let n0 = w.norm_sq();
        let mut cur = w.clone();
        if every > 0 {
            out.push(cur.clone());
        }
        for s in 1..=steps {
            self.step(&mut cur.psi);
            cur.t = w.t + s as f64 * self.dt;
            let drift = (cur.norm_sq() - n0).abs() / n0;
            if !drift.is_finite() {
                return Err(WaveError::NonFinite(s));
            }
            if drift > NORM_DRIFT_LIMIT {
                return Err(WaveError::NormDrift { step: s, drift });
            }
            if every > 0 && s % every == 0 {
                out.push(cur.clone());
            }
        }
        Ok(Some(cur))
    }
}

/// Crank-Nicolson evolution of `w` under the static potential `v`.
pub fn evolve_schrodinger(w: &WavefunctionGrid, v: &[f64], dt: f64, steps: usize) -> Result<WavefunctionGrid, WaveError> {
    SchrodingerSolver::new(w.grid, v, w.hbar, dt)?.evolve(w, steps)
}

/// Like [`evolve_schrodinger`] but keeps the initial state and every `every`-th step.
pub fn schrodinger_trajectory(w: &WavefunctionGrid, v: &[f64], dt: f64, steps: usize, every: usize) -> Result<Vec<WavefunctionGrid>, WaveError> {
    if every == 0 {
        return Err(WaveError::InvalidParameter("snapshot stride must be positive"));
    }
    let solver = SchrodingerSolver::new(w.grid, v, w.hbar, dt)?;
    let mut out = Vec::new();
    solver.run(w, steps, every, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(grid: &UniformGrid) -> Vec<f64> {
        grid.points().iter().map(|x| 0.5 * x * x).collect()
    }

    #[test]
    fn norm_is_conserved() {
        let g = UniformGrid::spanning(-10.0, 10.0, 512).unwrap();
        let w = WavefunctionGrid::from_fn(g, 1.0, |x| Complex64::new(0.0, 1.5 * x).exp() * (-(x - 1.0) * (x - 1.0)).exp()).unwrap();
        let out = evolve_schrodinger(&w, &harmonic(&g), 0.01, 300).unwrap();
        assert!((out.norm_sq() - 1.0).abs() < 1e-8);
        assert!((out.t - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ground_state_modulus_is_stationary() {
        let g = UniformGrid::spanning(-10.0, 10.0, 1024).unwrap();
        let w = WavefunctionGrid::from_fn(g, 1.0, |x| Complex64::new((-x * x / 2.0).exp(), 0.0)).unwrap();
        let v = harmonic(&g);
        let solver = SchrodingerSolver::new(g, &v, 1.0, 1e-3).unwrap();
        let mut cur = w.clone();
        let mut worst: f64 = 0.0;
        for chunk in 0..50 {
            cur = solver.evolve(&cur, 100).unwrap();
            for (a, b) in cur.psi.iter().zip(&w.psi) {
                worst = worst.max((a.norm() - b.norm()).abs());
            }
            let _ = chunk;
        }
        assert!((cur.t - 5.0).abs() < 1e-9);
        assert!(worst <= 1e-6, "{worst}");
        // the phase advances at E = ħω/2
        let i0 = g.n / 2;
        let phase = (cur.psi[i0] / w.psi[i0]).arg();
        let expected = -2.5f64;
        assert!((phase - expected).abs() < 1e-5, "{phase}");
    }

    #[test]
    fn free_gaussian_spreads() {
        // |ψ|² variance s² grows as s²(1 + (ħt / 2s²)²)
        let s2: f64 = 0.5;
        let g = UniformGrid::spanning(-40.0, 40.0, 4001).unwrap();
        let w = WavefunctionGrid::from_fn(g, 1.0, |x| Complex64::new((-x * x / (4.0 * s2)).exp(), 0.0)).unwrap();
        let v = alloc::vec![0.0; g.n];
        let t = 3.0;
        let out = evolve_schrodinger(&w, &v, 2e-3, 1500).unwrap();
        let rho = out.density();
        let x2: Vec<f64> = rho.iter().zip(g.points()).map(|(r, x)| r * x * x).collect();
        let var = integrate(&x2, g.dx);
        let expected = s2 * (1.0 + (t / (2.0 * s2)).powi(2));
        assert!((var / expected - 1.0).abs() < 1e-3, "{var} vs {expected}");
    }

    #[test]
    fn rejects_bad_input() {
        let g = UniformGrid::spanning(-1.0, 1.0, 10).unwrap();
        let w = WavefunctionGrid::from_fn(g, 1.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(evolve_schrodinger(&w, &[0.0; 10], 0.0, 1).is_err());
        assert!(evolve_schrodinger(&w, &[0.0; 9], 0.1, 1).is_err());
        assert!(WavefunctionGrid::new(g, alloc::vec![Complex64::new(0.0, 0.0); 3], 0.0, 1.0).is_err());
        assert!(WavefunctionGrid::from_fn(g, 1.0, |_| Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn trajectory_snapshots() {
        let g = UniformGrid::spanning(-8.0, 8.0, 256).unwrap();
        let w = WavefunctionGrid::from_fn(g, 1.0, |x| Complex64::new((-x * x / 2.0).exp(), 0.0)).unwrap();
        let traj = schrodinger_trajectory(&w, &harmonic(&g), 0.01, 10, 5).unwrap();
        assert_eq!(traj.len(), 3);
        assert!((traj[2].t - 0.1).abs() < 1e-12);
    }
}
