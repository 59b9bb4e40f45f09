use serde_json::json;
use stochtrace_core::hiddenvars::{
    born_from_counts, evolve_pair, exponential_race_probabilities, jump_statistics, polychotomic_select, random_state, sample_alpha, trajectory, ur_invariance_test, EvolutionSpec, HiddenError,
    HiddenPair, Observable, MAX_DIM,
};
use stochtrace_core::numkit::{norm, HaarMethod};
use stochtrace_core::{Complex64, ComplexMatrix, RngStream};

use super::diffusion::positive;
use super::{Ctx, Experiment, Outcome, QuickValue};
use crate::config::{float, int, text, ParamSpec, Params};
use crate::par;
use crate::summary::Check;
use crate::LabError;

fn method(p: &Params) -> Result<HaarMethod, LabError> {
    match p.str("method") {
        "gram_schmidt" => Ok(HaarMethod::GramSchmidt),
        "column_wise" => Ok(HaarMethod::ColumnWise),
        other => Err(LabError::config(format!("parameter `method` must be \"gram_schmidt\" or \"column_wise\", got {other:?}"))),
    }
}

fn e0(n: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[0] = 1.0.into();
    v
}

fn check_dim(n: usize) -> Result<(), LabError> {
    if !(2..=MAX_DIM).contains(&n) {
        return Err(LabError::config(format!("dimension {n} outside 2..={MAX_DIM}")));
    }
    Ok(())
}

const BORN_PARAMS: &[ParamSpec] = &[
    text("dims", "2,3,4,8", "dimensions cycled over the pairs"),
    int("n", 0, "single dimension; overrides `dims` when nonzero"),
    int("pairs", 20, "random (state, observable) pairs"),
    int("samples", 100_000, "hidden vectors per pair"),
    text("method", "gram_schmidt", "Haar sampler: \"gram_schmidt\" or \"column_wise\""),
];

pub const BORN_RULE: Experiment = Experiment {
    name: "born_rule",
    criterion: 13,
    about: "polychotomic selection with Haar hidden vectors reproduces |⟨φ_k|ψ⟩|²",
    params: BORN_PARAMS,
    quick: &[("samples", QuickValue::Int(2000)), ("pairs", QuickValue::Int(4))],
    run: born_rule,
};

fn born_rule(ctx: &Ctx) -> Result<Outcome, LabError> {
    let p = ctx.params;
    let dims: Vec<usize> = if p.usize("n") > 0 {
        vec![p.usize("n")]
    } else {
        p.f64_list("dims")?.into_iter().map(|d| if d.fract() == 0.0 && d >= 0.0 { Ok(d as usize) } else { Err(LabError::config(format!("dimension {d} is not an integer"))) }).collect::<Result<_, _>>()?
    };
    dims.iter().try_for_each(|n| check_dim(*n))?;
    let samples = p.usize("samples");
    if samples < 1000 || p.usize("pairs") == 0 {
        return Err(LabError::config("`samples` must be at least 1000 and `pairs` positive"));
    }
    let method = method(p)?;

    let mut out = Outcome::default();
    let mut report = Vec::new();
    let mut worst_race = 0.0_f64;
    let mut min_p = 1.0_f64;
    for j in 0..p.usize("pairs") {
        let n = dims[j % dims.len()];
        let stream = ctx.stream(j as u64);
        let obs = Observable::random(stream.derive(0), n)?;
        let psi = random_state(stream.derive(1), n);
        let alpha0 = e0(n);
        let draws = stream.derive(2);
        // category k + n·tie, so ties are counted alongside the selections
        let cats = par::count_categories(samples, 2 * n, |i| {
            let alpha = sample_alpha(&alpha0, draws.derive(i as u64), method)?;
            let s = polychotomic_select(&HiddenPair::new(psi.clone(), alpha, 1.0)?, &obs)?;
            Ok::<_, HiddenError>(s.index + n * s.tie as usize)
        })?;
        let counts: Vec<u64> = (0..n).map(|k| cats[k] + cats[k + n]).collect();
        let ties = cats[n..].iter().sum();
        let est = born_from_counts(&psi, &obs, counts, ties)?;
        let race = exponential_race_probabilities(&est.probabilities);
        let race_gap = race.iter().zip(&est.probabilities).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_race = worst_race.max(race_gap);
        min_p = min_p.min(est.chi_square.p_value);
        out.metric(format!("pair{j}_n{n}_chi2"), est.chi_square.statistic);
        out.check(Check::above(format!("pair{j}_n{n}_p_value"), est.chi_square.p_value, 0.01));
        report.push(json!({
            "pair": j,
            "n": n,
            "samples": samples,
            "counts": est.counts,
            "frequencies": est.frequencies,
            "born_probabilities": est.probabilities,
            "race_probabilities": race,
            "chi_square": est.chi_square.statistic,
            "dof": est.chi_square.dof,
            "p_value": est.chi_square.p_value,
            "ties": est.ties,
            "passed": est.chi_square.p_value > 0.01,
        }));
    }
    out.metric("min_p_value", min_p);
    out.metric("race_vs_born_max_gap", worst_race);
    out.check(Check::at_most("race_matches_born", worst_race, 1e-12));
    out.born = Some(json!({ "pairs": report }));
    Ok(out)
}

const INVARIANCE_PARAMS: &[ParamSpec] = &[
    int("n", 3, "Hilbert space dimension"),
    float("dt", 0.05, "time step for the invariance test"),
    int("horizon", 10, "steps before selection"),
    int("samples", 100_000, "hidden vectors per evolution"),
    float("eps", 0.1, "random Markov step size"),
    float("jump_dt", 0.01, "time step for jump counting"),
    int("jump_steps", 200, "steps per jump-count trajectory"),
    int("jump_trajectories", 300, "trajectories per evolution"),
    int("control_samples", 20_000, "samples for the non-unitary control"),
    text("method", "gram_schmidt", "Haar sampler: \"gram_schmidt\" or \"column_wise\""),
];

pub const UR_INVARIANCE: Experiment = Experiment {
    name: "ur_invariance",
    criterion: 14,
    about: "selection frequencies do not depend on the hidden evolution while jump statistics do",
    params: INVARIANCE_PARAMS,
    quick: &[("samples", QuickValue::Int(2000)), ("control_samples", QuickValue::Int(2000)), ("jump_trajectories", QuickValue::Int(50))],
    run: ur_invariance,
};

fn ur_invariance(ctx: &Ctx) -> Result<Outcome, LabError> {
    let p = ctx.params;
    positive(p, &["dt", "eps", "jump_dt"])?;
    let n = p.usize("n");
    check_dim(n)?;
    if p.usize("samples") == 0 || p.usize("jump_trajectories") < 2 || p.usize("control_samples") == 0 {
        return Err(LabError::config("sample and trajectory counts must be positive (at least two trajectories)"));
    }
    let method = method(p)?;
    let obs = Observable::random(ctx.stream(0), n)?;
    let h = Observable::random(ctx.stream(1), n)?.matrix;
    let psi = random_state(ctx.stream(2), n);
    let alpha0 = e0(n);
    let markov = EvolutionSpec::RandomMarkov { eps: p.f64("eps") };
    let specs = [EvolutionSpec::Frozen, EvolutionSpec::Quantum, markov.clone()];
    let r = ur_invariance_test(&psi, &obs, &h, &specs, &alpha0, p.f64("dt"), p.usize("horizon"), p.usize("samples"), ctx.stream(3), method)?;

    let (jdt, jsteps, jn) = (p.f64("jump_dt"), p.usize("jump_steps"), p.usize("jump_trajectories"));
    let frozen = jump_statistics(&psi, &obs, &h, &EvolutionSpec::Frozen, &alpha0, jdt, jsteps, jn, ctx.stream(4), method)?;
    let moving = jump_statistics(&psi, &obs, &h, &markov, &alpha0, jdt, jsteps, jn, ctx.stream(4), method)?;
    let jump_z = (moving.mean.mean - frozen.mean.mean) / (moving.mean.stderr.powi(2) + frozen.mean.stderr.powi(2)).sqrt();

    // a contracting map on α must be caught
    let mut squash = vec![0.05; n];
    squash[0] = 1.0;
    let control = [EvolutionSpec::Frozen, EvolutionSpec::Custom(vec![ComplexMatrix::diag(&squash)])];
    let c = ur_invariance_test(&psi, &obs, &h, &control, &alpha0, p.f64("dt"), p.usize("horizon"), p.usize("control_samples"), ctx.stream(5), method)?;

    let mut out = Outcome::default();
    for (i, j, chi) in &r.pairwise {
        out.metric(format!("p_{}_vs_{}", r.specs[*i].label, r.specs[*j].label), chi.p_value);
    }
    out.metric("min_p_value", r.min_p_value);
    out.metric("jump_mean_frozen", frozen.mean.mean);
    out.metric("jump_mean_random_markov", moving.mean.mean);
    out.metric("jump_separation_z", jump_z);
    out.metric("control_min_p_value", c.min_p_value);
    out.check(Check::above("marginals_homogeneous", if r.flagged.is_empty() { r.min_p_value } else { 0.0 }, 0.01));
    out.check(Check::at_least("jump_separation_z", jump_z, 5.0));
    out.check(Check::holds("nonunitary_control_flagged", c.flagged == [1] && c.min_p_value < 0.01));
    out.born = Some(json!({
        "specs": r.specs.iter().map(|s| json!({
            "label": s.label,
            "counts": s.counts,
            "frequencies": s.frequencies,
            "unitarity_defect": s.unitarity_defect,
        })).collect::<Vec<_>>(),
        "born_probabilities": obs.probabilities(&ur_state(&psi, &h, p.f64("dt"), p.usize("horizon"))?),
        "pairwise": r.pairwise.iter().map(|(i, j, chi)| json!({"a": i, "b": j, "chi_square": chi.statistic, "p_value": chi.p_value})).collect::<Vec<_>>(),
    }));

    // one random-Markov trajectory of the selected eigenvalue
    let s = ctx.stream(6);
    let pair = HiddenPair::new(psi.clone(), sample_alpha(&alpha0, s, method)?, norm(&alpha0))?;
    let pairs = evolve_pair(&pair, &h, &markov, jdt, jsteps, s.derive(1))?;
    let traj = trajectory(&pairs, &obs, 0.0, jdt)?;
    let rows = (0..traj.t.len()).map(|i| vec![i.into(), traj.t[i].into(), traj.k[i].into(), traj.eigenvalue[i].into()]);
    ctx.csv("hidden_traj.csv", &["step", "t", "k", "eigenvalue"], rows)?;
    Ok(out)
}

/// ψ after `steps` steps of e^{−iH dt}, the state the invariance test selects against.
fn ur_state(psi: &[Complex64], h: &ComplexMatrix, dt: f64, steps: usize) -> Result<Vec<Complex64>, LabError> {
    let pair = HiddenPair::new(psi.to_vec(), psi.to_vec(), 1.0)?;
    let out = evolve_pair(&pair, h, &EvolutionSpec::Frozen, dt, steps, RngStream::new(0, 0))?;
    Ok(out[steps].psi.clone())
}
