use stochtrace_core::waveengine::{
    continuity_residual, fields_from_wavefunction, hj_residual, markov_wave_residual, scaled_equation_residual, schrodinger_residual, schrodinger_trajectory, HjVariant, HydroFields,
    MarkovWavePair, WavefunctionGrid,
};
use stochtrace_core::{Complex64, UniformGrid};

use super::diffusion::positive;
use super::{Ctx, Experiment, Outcome};
use crate::config::{float, int, ParamSpec, Params};
use crate::summary::Check;
use crate::LabError;

const GRID_PARAMS: &[ParamSpec] = &[
    int("grid_points", 1024, "grid points"),
    float("half_width", 10.0, "grid spans [-half_width, half_width]"),
    float("dt", 1e-3, "wave time step"),
    float("nu", 0.5, "diffusion constant"),
];

fn grid(p: &Params) -> Result<UniformGrid, LabError> {
    positive(p, &["half_width", "dt"])?;
    let hw = p.f64("half_width");
    UniformGrid::spanning(-hw, hw, p.usize("grid_points")).filter(|g| g.n >= 16).ok_or_else(|| LabError::config("grid needs at least 16 points"))
}

/// Three Crank-Nicolson snapshots of the harmonic ground state (ħ = 1) and the potential.
fn harmonic_ground(p: &Params) -> Result<(Vec<WavefunctionGrid>, Vec<f64>), LabError> {
    let g = grid(p)?;
    let w = WavefunctionGrid::from_fn(g, 1.0, |x| Complex64::new((-x * x / 2.0).exp(), 0.0))?;
    let v: Vec<f64> = g.points().iter().map(|x| 0.5 * x * x).collect();
    Ok((schrodinger_trajectory(&w, &v, p.f64("dt"), 2, 1)?, v))
}

/// Stationary Ornstein-Uhlenbeck fields: ln ρ = −x², v = 0.
fn ou_fields(p: &Params, t: f64) -> Result<HydroFields, LabError> {
    let g = grid(p)?;
    positive(p, &["nu"])?;
    let ln_rho: Vec<f64> = g.points().iter().map(|x| -x * x).collect();
    let mut f = HydroFields::from_log_density(g, 0.0, p.f64("nu"), 1.0, &ln_rho, &vec![0.0; g.n])?;
    f.t = t;
    Ok(f)
}

fn write_fields(ctx: &Ctx, f: &HydroFields) -> Result<(), LabError> {
    let rows = (0..f.grid.n).map(|i| vec![f.t.into(), f.grid.x(i).into(), f.rho[i].into(), f.s_phase[i].into(), f.u[i].into(), f.v[i].into(), f.b[i].into(), f.b_star[i].into()]);
    ctx.csv("fields.csv", &["t", "x", "rho", "S", "u", "v", "b", "b_star"], rows)
}

pub const HJ_SIGN_FLIP: Experiment = Experiment {
    name: "hj_sign_flip",
    criterion: 4,
    about: "the Schrödinger and dissipative Hamilton-Jacobi equations separate the two stationary states",
    params: GRID_PARAMS,
    quick: &[],
    run: hj_sign_flip,
};

fn hj_sign_flip(ctx: &Ctx) -> Result<Outcome, LabError> {
    let p = ctx.params;
    let (traj, v) = harmonic_ground(p)?;
    positive(p, &["nu"])?;
    let nu = p.f64("nu");
    let quantum = traj.iter().map(|w| fields_from_wavefunction(w, nu)).collect::<Result<Vec<_>, _>>()?;
    let dt = p.f64("dt");
    let dissipative = (0..3).map(|j| ou_fields(p, j as f64 * dt)).collect::<Result<Vec<_>, _>>()?;
    let u: Vec<f64> = dissipative[0].grid.points().iter().map(|x| -0.5 * x * x).collect();

    let q30 = hj_residual(&quantum, 1, &v, HjVariant::Schrodinger30)?;
    let q42 = hj_residual(&quantum, 1, &v, HjVariant::Dissipative42)?;
    let d30 = hj_residual(&dissipative, 1, &u, HjVariant::Schrodinger30)?;
    let d42 = hj_residual(&dissipative, 1, &u, HjVariant::Dissipative42)?;
    let d40 = hj_residual(&dissipative, 1, &u, HjVariant::Modified40)?;

    let mut out = Outcome::default();
    out.metric("eq30", q30.demeaned_sup);
    out.metric("eq30_mean", q30.mean);
    out.metric("eq30_dissipative", d30.demeaned_sup);
    out.metric("eq42", d42.demeaned_sup);
    out.metric("eq42_schrodinger", q42.demeaned_sup);
    out.metric("eq40", d40.demeaned_sup);
    out.metric("eq31", continuity_residual(&quantum, 1)?);
    out.metric("eq31_dissipative", continuity_residual(&dissipative, 1)?);
    out.check(Check::at_most("eq30_schrodinger", q30.demeaned_sup, 1e-4));
    out.check(Check::at_least("eq30_dissipative", d30.demeaned_sup, 0.1));
    out.check(Check::at_most("eq42_dissipative", d42.demeaned_sup, 1e-4));
    out.check(Check::at_least("eq42_schrodinger", q42.demeaned_sup, 0.1));
    write_fields(ctx, &quantum[1])?;
    Ok(out)
}

pub const MARKOV_WAVE: Experiment = Experiment {
    name: "markov_wave",
    criterion: 5,
    about: "the stationary Ornstein-Uhlenbeck pair solves the Markov wave equations",
    params: GRID_PARAMS,
    quick: &[],
    run: markov_wave,
};

fn markov_wave(ctx: &Ctx) -> Result<Outcome, LabError> {
    let f = ou_fields(ctx.params, 0.0)?;
    let u: Vec<f64> = f.grid.points().iter().map(|x| -x * x / 2.0).collect();
    let pair = MarkovWavePair::from_fields(&f, &u)?;
    let r = markov_wave_residual(std::slice::from_ref(&pair), 0, true)?;
    let defect = pair.product_defect(&f.rho);

    let mut out = Outcome::default();
    out.metric("eq64", r.sup());
    out.metric("eq64_plus", r.plus_sup);
    out.metric("eq64_minus", r.minus_sup);
    out.metric("eq64_constant", r.constant);
    out.metric("product_defect", defect);
    out.check(Check::at_most("eq64_residual", r.sup(), 1e-6));
    out.check(Check::at_most("product_defect", defect, 1e-6));
    write_fields(ctx, &f)?;
    let rows = (0..f.grid.n).map(|i| vec![f.grid.x(i).into(), pair.phi_plus[i].into(), pair.phi_minus[i].into(), f.rho[i].into()]);
    ctx.csv("markov_pair.csv", &["x", "phi_plus", "phi_minus", "rho"], rows)?;
    Ok(out)
}

const SCALED_PARAMS: &[ParamSpec] = &[
    int("grid_points", 1024, "grid points"),
    float("half_width", 10.0, "grid spans [-half_width, half_width]"),
    float("dt", 1e-3, "wave time step"),
    float("z", 2.0, "real scale factor for the scaled equation"),
];

pub const SCALED_EQUIVALENCE: Experiment = Experiment {
    name: "scaled_equivalence",
    criterion: 6,
    about: "the scaled wave equation holds for real z and takes a real form for |z| = 1",
    params: SCALED_PARAMS,
    quick: &[],
    run: scaled_equivalence,
};

fn scaled_equivalence(ctx: &Ctx) -> Result<Outcome, LabError> {
    let p = ctx.params;
    let (traj, v) = harmonic_ground(p)?;
    let z = p.f64("z");
    let r90 = scaled_equation_residual(&traj, 1, &v, Complex64::new(z, 0.0))?;
    let r91 = scaled_equation_residual(&traj, 1, &v, Complex64::new(0.0, 1.0))?;

    let mut out = Outcome::default();
    out.metric("eq90", r90.sup);
    out.metric("eq91", r91.sup);
    out.metric("eq91_max_imag", r91.max_imag);
    out.metric("schrodinger", schrodinger_residual(&traj, 1, &v)?);
    out.check(Check::at_most("eq90_residual", r90.sup, 1e-4));
    out.check(Check::at_most("eq91_real_form_residual", if r91.real_form { r91.sup } else { f64::INFINITY }, 1e-4));
    Ok(out)
}
