use std::collections::BTreeSet;

use stochtrace_core::diffusion::{covariance_stats, fit_inverse_dt, kinetic_action_terms, AnalyticDrift, DriftField, FixedStart, GridDensitySampler, Record, SimulationConfig};
use stochtrace_core::waveengine::{density_bin_edges, fields_from_wavefunction, histogram_vs_density, schrodinger_trajectory, WavefunctionGrid};
use stochtrace_core::{Complex64, UniformGrid};

use super::{max_pairwise_z, Ctx, Experiment, Outcome, QuickValue};
use crate::config::{float, int, text, ParamSpec, Params};
use crate::par;
use crate::summary::Check;
use crate::LabError;

pub(crate) fn step_of(t: f64, dt: f64) -> Result<usize, LabError> {
    let s = (t / dt).round();
    if !(t >= 0.0) || (s * dt - t).abs() > 1e-9 * t.max(1.0) {
        return Err(LabError::config(format!("time {t} is not a non-negative multiple of dt = {dt}")));
    }
    Ok(s as usize)
}

pub(crate) fn positive(p: &Params, keys: &[&str]) -> Result<(), LabError> {
    for k in keys {
        let v = p.f64(k);
        if !(v > 0.0 && v.is_finite()) {
            return Err(LabError::config(format!("parameter `{k}` must be positive, got {v}")));
        }
    }
    Ok(())
}

fn missing(what: &str) -> LabError {
    LabError::Numerical { module: "diffusion", message: format!("{what} unavailable") }
}

const WIENER_PARAMS: &[ParamSpec] = &[
    float("nu", 0.5, "diffusion constant"),
    float("dt", 1e-3, "time step"),
    int("paths", 100_000, "number of paths"),
    float("t1", 0.3, "earlier time"),
    float("t2", 0.7, "later time"),
    int("export_paths", 20, "paths written to paths.csv"),
    int("export_every", 10, "step stride in paths.csv"),
];

pub const WIENER_STRUCTURE: Experiment = Experiment {
    name: "wiener_structure",
    criterion: 1,
    about: "Wiener covariance 2ν·min(t1,t2) and the forward/backward ordered products",
    params: WIENER_PARAMS,
    quick: &[("paths", QuickValue::Int(2000))],
    run: wiener_structure,
};

fn wiener_structure(ctx: &Ctx) -> Result<Outcome, LabError> {
    let p = ctx.params;
    positive(p, &["nu", "dt", "t1", "t2"])?;
    let (nu, dt, t1, t2) = (p.f64("nu"), p.f64("dt"), p.f64("t1"), p.f64("t2"));
    let (s1, s2) = (step_of(t1, dt)?, step_of(t2, dt)?);
    if s1 >= s2 {
        return Err(LabError::config("t1 must be earlier than t2"));
    }
    let every = p.usize("export_every").max(1);
    let steps = s2 + 1;
    let mut rec: BTreeSet<usize> = (0..=steps).step_by(every).collect();
    rec.extend([s1, s1 + 1, s2, s2 + 1]);
    let cfg = SimulationConfig::new(nu, dt, steps, p.usize("paths")).recording(Record::Steps(rec.into_iter().collect()));
    let ens = par::simulate(&AnalyticDrift(|_: f64, _: f64| 0.0), &FixedStart(0.0), &cfg, ctx.stream(0))?;
    let stats = covariance_stats(&ens, s1, s2)?;
    let left = stats.ordered_product_left.ok_or_else(|| missing("forward ordered product"))?;
    let right = stats.ordered_product_right.ok_or_else(|| missing("backward ordered product"))?;

    let mut out = Outcome::default();
    let expected = 2.0 * nu * t1;
    out.metric("cov", stats.cov.mean);
    out.metric("cov_stderr", stats.cov.stderr);
    out.metric("cov_expected", expected);
    out.metric("ordered_forward", left.mean);
    out.metric("ordered_forward_stderr", left.stderr);
    out.metric("ordered_backward", right.mean);
    out.metric("ordered_backward_stderr", right.stderr);
    out.check(Check::at_most("cov_z", stats.cov.z_score(expected).abs(), 3.0));
    out.check(Check::at_most("ordered_forward_z", left.z_score(2.0 * nu).abs(), 3.0));
    out.check(Check::at_most("ordered_backward_z", right.z_score(0.0).abs(), 3.0));

    let n_export = p.usize("export_paths").min(ens.n_paths());
    let steps_rec = ens.recorded_steps().to_vec();
    let rows = (0..n_export).flat_map(|pid| {
        let row = ens.path(pid).to_vec();
        let ens = &ens;
        steps_rec.clone().into_iter().zip(row).map(move |(s, x)| vec![pid.into(), s.into(), ens.time(s).into(), x.into()])
    });
    ctx.csv("paths.csv", &["path_id", "step", "t", "x"], rows)?;
    Ok(out)
}

const SPLIT_PARAMS: &[ParamSpec] = &[
    float("nu", 0.5, "diffusion constant"),
    text("dts", "0.01,0.005,0.0025", "step sizes"),
    int("paths", 100_000, "paths per step size"),
    float("t", 0.5, "time at which increments are taken"),
];

pub const DIVERGENCE_SPLIT: Experiment = Experiment {
    name: "divergence_split",
    criterion: 2,
    about: "overlapping kinetic estimator diverges as ν/dt, the nonoverlapping one stays finite",
    params: SPLIT_PARAMS,
    quick: &[("paths", QuickValue::Int(5000))],
    run: divergence_split,
};

fn divergence_split(ctx: &Ctx) -> Result<Outcome, LabError> {
    let p = ctx.params;
    positive(p, &["nu", "t"])?;
    let (nu, t) = (p.f64("nu"), p.f64("t"));
    let dts = p.f64_list("dts")?;
    if dts.len() < 2 || dts.iter().any(|d| !(*d > 0.0)) {
        return Err(LabError::config("`dts` needs at least two positive step sizes"));
    }
    let mut over = Vec::new();
    let mut non = Vec::new();
    let mut rows = Vec::new();
    for (i, &dt) in dts.iter().enumerate() {
        let s = step_of(t, dt)?;
        let cfg = SimulationConfig::new(nu, dt, s + 2, p.usize("paths")).recording(Record::Steps(vec![s, s + 1, s + 2]));
        let ens = par::simulate(&AnalyticDrift(|_: f64, _: f64| 0.0), &FixedStart(0.0), &cfg, ctx.stream(i as u64))?;
        let k = kinetic_action_terms(&ens, s)?;
        rows.push(vec![dt.into(), k.overlapping.mean.into(), k.overlapping.stderr.into(), k.nonoverlapping.mean.into(), k.nonoverlapping.stderr.into()]);
        over.push((dt, k.overlapping));
        non.push((dt, k.nonoverlapping));
    }
    let fit = fit_inverse_dt(&over)?;
    let non_fit = fit_inverse_dt(&non)?;
    let non_est: Vec<_> = non.iter().map(|(_, e)| *e).collect();

    let mut out = Outcome::default();
    out.metric("overlapping_slope", fit.slope);
    out.metric("overlapping_slope_stderr", fit.slope_stderr);
    out.metric("overlapping_intercept", fit.intercept);
    out.metric("nonoverlapping_slope", non_fit.slope);
    out.metric("nonoverlapping_slope_stderr", non_fit.slope_stderr);
    for (dt, e) in &non {
        out.metric(format!("nonoverlapping_dt{dt}"), e.mean);
    }
    out.check(Check::at_most("overlapping_slope_rel_error", (fit.slope - nu).abs() / nu, 0.05));
    out.check(Check::at_most("nonoverlapping_pairwise_z", max_pairwise_z(&non_est), 3.0));
    out.check(Check::at_most("nonoverlapping_slope_z", (non_fit.slope / non_fit.slope_stderr).abs(), 3.0));
    ctx.csv("kinetic.csv", &["dt", "overlapping", "overlapping_stderr", "nonoverlapping", "nonoverlapping_stderr"], rows)?;
    Ok(out)
}

const MATCH_PARAMS: &[ParamSpec] = &[
    float("hbar", 1.0, "reduced Planck constant of the harmonic ground state"),
    text("nus", "0.25,0.5,1.0", "diffusion constants"),
    text("times", "0.5,1.0", "times at which histograms are compared"),
    int("paths", 100_000, "paths per diffusion constant"),
    float("dt", 1e-3, "time step for both the wave and the paths"),
    int("bins", 30, "equal-probability histogram bins"),
    int("grid_points", 801, "grid points"),
    float("half_width", 8.0, "grid spans [-half_width, half_width]"),
    int("slice_every", 50, "wave steps between drift slices"),
];

pub const DENSITY_MATCHING: Experiment = Experiment {
    name: "density_matching",
    criterion: 3,
    about: "paths with b = v + ν∂ln ρ reproduce |ψ|² for every ν",
    params: MATCH_PARAMS,
    quick: &[("paths", QuickValue::Int(5000)), ("times", QuickValue::Str("0.1")), ("nus", QuickValue::Str("0.5"))],
    run: density_matching,
};

fn density_matching(ctx: &Ctx) -> Result<Outcome, LabError> {
    let p = ctx.params;
    positive(p, &["hbar", "dt", "half_width"])?;
    let (hbar, dt, hw) = (p.f64("hbar"), p.f64("dt"), p.f64("half_width"));
    let nus = p.f64_list("nus")?;
    let times = p.f64_list("times")?;
    if nus.iter().any(|n| !(*n > 0.0)) || times.is_empty() {
        return Err(LabError::config("`nus` must be positive and `times` non-empty"));
    }
    let every = p.usize("slice_every").max(1);
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let steps = step_of(t_max, dt)?;
    let steps = steps.div_ceil(every) * every;
    let grid = UniformGrid::spanning(-hw, hw, p.usize("grid_points")).ok_or_else(|| LabError::config("invalid grid"))?;
    let w = WavefunctionGrid::from_fn(grid, hbar, |x| Complex64::new((-x * x / (2.0 * hbar)).exp(), 0.0))?;
    let v: Vec<f64> = grid.points().iter().map(|x| 0.5 * x * x).collect();
    let traj = schrodinger_trajectory(&w, &v, dt, steps, every)?;
    let slice_times: Vec<f64> = traj.iter().map(|s| s.t).collect();
    let record: Vec<usize> = times.iter().map(|t| step_of(*t, dt)).collect::<Result<BTreeSet<_>, _>>()?.into_iter().collect();

    let mut out = Outcome::default();
    let mut rows = Vec::new();
    let n_bins = p.usize("bins");
    for (i, &nu) in nus.iter().enumerate() {
        let fields = traj.iter().map(|s| fields_from_wavefunction(s, nu)).collect::<Result<Vec<_>, _>>()?;
        let drift = DriftField::from_slices(grid, slice_times.clone(), fields.iter().map(|f| f.b.clone()).collect())?;
        let x0 = GridDensitySampler::new(grid, &fields[0].rho)?;
        let cfg = SimulationConfig::new(nu, dt, steps, p.usize("paths")).recording(Record::Steps(record.clone()));
        let ens = par::simulate(&drift, &x0, &cfg, ctx.stream(i as u64))?;
        out.metric(format!("nu{nu}_boundary_hit_rate"), ens.boundary_hit_rate());
        for &t in &times {
            let step = step_of(t, dt)?;
            let slice = slice_times
                .iter()
                .position(|s| (s - t).abs() < 1e-9)
                .ok_or_else(|| LabError::config(format!("time {t} is not on a drift slice (every {} time units)", every as f64 * dt)))?;
            let column = ens.column(step)?;
            let rho = &fields[slice].rho;
            let chi = histogram_vs_density(&column, &grid, rho, n_bins);
            let edges = density_bin_edges(&grid, rho, n_bins);
            let mut counts = vec![0u64; n_bins];
            for x in &column {
                counts[edges.partition_point(|e| e <= x)] += 1;
            }
            let expected = column.len() as f64 / n_bins as f64;
            for (b, c) in counts.iter().enumerate() {
                let lo = if b == 0 { f64::NEG_INFINITY } else { edges[b - 1] };
                let hi = edges.get(b).copied().unwrap_or(f64::INFINITY);
                rows.push(vec![nu.into(), t.into(), b.into(), lo.into(), hi.into(), (*c).into(), expected.into()]);
            }
            out.metric(format!("nu{nu}_t{t}_chi2"), chi.statistic);
            out.check(Check::above(format!("nu{nu}_t{t}_p_value"), chi.p_value, 0.01));
        }
    }
    ctx.csv("histogram.csv", &["nu", "t", "bin", "lo", "hi", "observed", "expected"], rows)?;
    Ok(out)
}
