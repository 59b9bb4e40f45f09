use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::calculus::{antiderivative, d1, d2};
use super::fields::{argmax, unwrap_phase};
use super::{quantum_potential_term, HydroFields, WaveError, WavefunctionGrid, DENSITY_FLOOR};

/// Largest fraction of below-floor points tolerated inside the density's support.
pub const SPARSE_DENSITY_LIMIT: f64 = 0.01;

// slice pair used for ∂t at index k: central inside, one-sided at the ends
fn time_pair(n: usize, k: usize) -> (usize, usize) {
    if k == 0 {
        (0, 1)
    } else if k == n - 1 {
        (n - 2, n - 1)
    } else {
        (k - 1, k + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HjVariant {
    /// `∂t S_N + ½ v² + φ - ν²/2 (∇ ln ρ)² - ν² Δ ln ρ` with `∇S_N = v`.
    Schrodinger30,
    /// `∂t S_MOD + ½ b² + ν Δ S_MOD + φ` with `∇S_MOD = b`.
    Modified40,
    /// `∂t S_N + ½ v² + φ + ν²/2 (∇ ln ρ)² + ν² Δ ln ρ`.
    Dissipative42,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HjResidual {
    pub field: Vec<f64>,
    /// Spatial mean over the mask (the unobservable additive gauge).
    pub mean: f64,
    /// `sup |field - mean|` over the mask.
    pub demeaned_sup: f64,
}

/// Hamilton-Jacobi residual at `slices[k]` for the potential `phi`.
///
/// `S_N` and `S_MOD` are antiderivatives of `v` and `b` from the left end; every
/// slice is re-gauged to vanish at the density peak of `slices[k]` before
/// differencing in time. A single slice is treated as stationary.
pub fn hj_residual(slices: &[HydroFields], k: usize, phi: &[f64], variant: HjVariant) -> Result<HjResidual, WaveError> {
    let at = slices.get(k).ok_or(WaveError::InvalidParameter("slice index out of range"))?;
    if slices.iter().any(|s| !s.same_grid(at)) || phi.len() != at.grid.n {
        return Err(WaveError::GridMismatch);
    }
    let n = at.grid.n;
    let dx = at.grid.dx;
    let reference = at.reference_index();
    let gauge = |s: &HydroFields| -> Vec<f64> {
        let src = if variant == HjVariant::Modified40 { &s.b } else { &s.v };
        let a = antiderivative(src, dx);
        let c = a[reference];
        a.iter().map(|x| x - c).collect()
    };
    let ds_dt: Vec<f64> = if slices.len() == 1 {
        alloc::vec![0.0; n]
    } else {
        let (a, b) = time_pair(slices.len(), k);
        let (sa, sb) = (gauge(&slices[a]), gauge(&slices[b]));
        let h = slices[b].t - slices[a].t;
        sb.iter().zip(&sa).map(|(p, q)| (p - q) / h).collect()
    };
    let nu = at.nu;
    // second derivatives straight from ln ρ and S keep the stencil reach at two points
    let lap_ln_rho = d2(&at.ln_rho(), dx);
    let field: Vec<f64> = match variant {
        HjVariant::Schrodinger30 | HjVariant::Dissipative42 => {
            let sign = if variant == HjVariant::Schrodinger30 { -1.0 } else { 1.0 };
            (0..n).map(|i| ds_dt[i] + 0.5 * at.v[i] * at.v[i] + phi[i] + sign * (0.5 * at.u[i] * at.u[i] + nu * nu * lap_ln_rho[i])).collect()
        }
        HjVariant::Modified40 => {
            let dv = d2(&at.s_phase, dx);
            (0..n).map(|i| ds_dt[i] + 0.5 * at.b[i] * at.b[i] + nu * (nu * lap_ln_rho[i] + at.hbar * dv[i]) + phi[i]).collect()
        }
    };
    let idx: Vec<usize> = (0..n).filter(|&i| at.mask[i]).collect();
    if idx.is_empty() {
        return Err(WaveError::InvalidParameter("no resolved points"));
    }
    let mean = idx.iter().map(|&i| field[i]).sum::<f64>() / idx.len() as f64;
    let demeaned_sup = idx.iter().map(|&i| (field[i] - mean).abs()).fold(0.0, f64::max);
    Ok(HjResidual { field, mean, demeaned_sup })
}

/// `sup |∂t ρ + (v ρ)'|` over the resolved interior of `slices[k]`.
pub fn continuity_residual(slices: &[HydroFields], k: usize) -> Result<f64, WaveError> {
    if slices.len() < 2 {
        return Err(WaveError::InvalidParameter("continuity residual needs two time slices"));
    }
    let at = slices.get(k).ok_or(WaveError::InvalidParameter("slice index out of range"))?;
    if slices.iter().any(|s| !s.same_grid(at)) {
        return Err(WaveError::GridMismatch);
    }
    let (a, b) = time_pair(slices.len(), k);
    let h = slices[b].t - slices[a].t;
    let flux: Vec<f64> = at.v.iter().zip(&at.rho).map(|(v, r)| v * r).collect();
    let div = d1(&flux, at.grid.dx);
    Ok((0..at.grid.n)
        .filter(|&i| at.mask[i])
        .map(|i| ((slices[b].rho[i] - slices[a].rho[i]) / h + div[i]).abs())
        .fold(0.0, f64::max))
}

fn check_trajectory(traj: &[WavefunctionGrid], k: usize) -> Result<&WavefunctionGrid, WaveError> {
    if traj.len() < 2 {
        return Err(WaveError::InvalidParameter("time derivatives need two states"));
    }
    let at = traj.get(k).ok_or(WaveError::InvalidParameter("slice index out of range"))?;
    if traj.iter().any(|w| w.grid != at.grid || w.hbar != at.hbar) {
        return Err(WaveError::GridMismatch);
    }
    Ok(at)
}

// above-floor flags, eroded evaluation mask and floored density
type Support = (Vec<bool>, Vec<bool>, Vec<f64>);

fn support(w: &WavefunctionGrid) -> Result<Support, WaveError> {
    let raw = w.density();
    let peak = raw.iter().copied().fold(0.0, f64::max);
    let floor = DENSITY_FLOOR * peak;
    let above: Vec<bool> = raw.iter().map(|r| *r > floor).collect();
    let first = above.iter().position(|a| *a).ok_or(WaveError::InvalidParameter("wavefunction vanishes"))?;
    let last = above.iter().rposition(|a| *a).unwrap();
    let holes = above[first..=last].iter().filter(|a| !**a).count();
    let fraction = holes as f64 / (last - first + 1) as f64;
    if fraction > SPARSE_DENSITY_LIMIT {
        return Err(WaveError::SparseDensity { fraction });
    }
    let n = raw.len();
    let mask = (0..n).map(|i| i >= 2 && i + 2 < n && above[i - 2..=i + 2].iter().all(|a| *a)).collect();
    let floored = raw.iter().map(|r| r.max(floor)).collect();
    Ok((above, mask, floored))
}

/// `sup |[-ħ²/2 Δ + V] ψ - iħ ∂t ψ|` at `traj[k]` over the resolved interior.
pub fn schrodinger_residual(traj: &[WavefunctionGrid], k: usize, v: &[f64]) -> Result<f64, WaveError> {
    let at = check_trajectory(traj, k)?;
    let (_, mask, _) = support(at)?;
    let (a, b) = time_pair(traj.len(), k);
    let h = traj[b].t - traj[a].t;
    let lap = d2(&at.psi, at.grid.dx);
    let hb = at.hbar;
    Ok((0..at.grid.n)
        .filter(|&i| mask[i])
        .map(|i| {
            let dt = (traj[b].psi[i] - traj[a].psi[i]) / h;
            (lap[i] * (-0.5 * hb * hb) + at.psi[i] * v[i] - Complex64::i() * hb * dt).norm()
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledResidual {
    pub z: Complex64,
    /// Purely imaginary `z`: the residual is that of the real pair `exp(R ± S/|z|)`,
    /// both signs evaluated.
    pub real_form: bool,
    pub sup: f64,
    /// Largest imaginary part of the residual in the real form (round-off only).
    pub max_imag: f64,
}

/// Residual of the scaled wave equation
/// `[-(zħ)²/2 Δ + V + ħ²/2 (z² - 1) Δ√ρ/√ρ] χ = i z ħ ∂t χ` with `χ = exp(R + iS/z)`,
/// built from a numerically evolved trajectory at `traj[k]`.
///
/// For `z = ±i|z|` this is the real pair `exp(R ± S/|z|)`; both signs are checked.
pub fn scaled_equation_residual(traj: &[WavefunctionGrid], k: usize, v: &[f64], z: Complex64) -> Result<ScaledResidual, WaveError> {
    if z.norm() == 0.0 || !z.is_finite() {
        return Err(WaveError::InvalidParameter("z must be finite and nonzero"));
    }
    let at = check_trajectory(traj, k)?;
    if v.len() != at.grid.n {
        return Err(WaveError::GridMismatch);
    }
    let (above, mask, floored) = support(at)?;
    let reference = argmax(&at.density());
    let (a, b) = time_pair(traj.len(), k);
    // phases unwrapped from a common reference and kept continuous in time there
    let mut phases = [Vec::new(), Vec::new(), Vec::new()];
    let s_k = unwrap_phase(at, &above, reference)?;
    for (slot, j) in [a, k, b].into_iter().enumerate() {
        let mut s = if j == k { s_k.clone() } else { unwrap_phase(&traj[j], &support(&traj[j])?.0, reference)? };
        let shift = 2.0 * PI * libm::round((s_k[reference] - s[reference]) / (2.0 * PI));
        s.iter_mut().for_each(|x| *x += shift);
        phases[slot] = s;
    }
    let log_amp = |w: &WavefunctionGrid| -> Vec<f64> {
        let raw = w.density();
        let peak = raw.iter().copied().fold(0.0, f64::max);
        raw.iter().map(|r| 0.5 * r.max(DENSITY_FLOOR * peak).ln()).collect()
    };
    let r = [log_amp(&traj[a]), log_amp(at), log_amp(&traj[b])];
    let q = quantum_potential_term(&floored, 1.0, at.grid.dx)?;
    let hb = at.hbar;
    let h = traj[b].t - traj[a].t;
    let one = |z: Complex64| -> (f64, f64) {
        let chi = |slot: usize| -> Vec<Complex64> { r[slot].iter().zip(&phases[slot]).map(|(r, s)| (Complex64::new(*r, 0.0) + Complex64::i() * s / z).exp()).collect() };
        let (ca, ck, cb) = (chi(0), chi(1), chi(2));
        let lap = d2(&ck, at.grid.dx);
        let kin = -(z * hb) * (z * hb) * 0.5;
        let corr = (z * z - 1.0) * (0.5 * hb * hb);
        let (mut sup, mut imag): (f64, f64) = (0.0, 0.0);
        for i in (0..at.grid.n).filter(|&i| mask[i]) {
            let dt = (cb[i] - ca[i]) / h;
            let res = kin * lap[i] + (corr * q[i] + v[i]) * ck[i] - Complex64::i() * z * hb * dt;
            sup = sup.max(res.norm());
            imag = imag.max(res.im.abs());
        }
        (sup, imag)
    };
    let real_form = z.re == 0.0;
    let (sup, max_imag) = if real_form {
        let (s1, i1) = one(z);
        let (s2, i2) = one(-z);
        (s1.max(s2), i1.max(i2))
    } else {
        (one(z).0, 0.0)
    };
    Ok(ScaledResidual { z, real_form, sup, max_imag })
}
