use stochtrace_core::diffusion::{AnalyticDrift, FixedStart, Record, SimulationConfig};
use stochtrace_core::emergent::{
    build_basis, commutator_block, hamiltonian_expectation, hamiltonian_operator, heisenberg_flow, operator_matrices, time_ordered_moment, BasisKind, OperatorSet, WeightedBasis,
};
use stochtrace_core::numkit::stats::MeanEstimate;
use stochtrace_core::waveengine::HydroFields;
use stochtrace_core::{ComplexMatrix, UniformGrid};

use super::diffusion::{positive, step_of};
use super::{Ctx, Experiment, Outcome, QuickValue};
use crate::config::{float, int, text, ParamSpec, Params};
use crate::output::write_operator;
use crate::par;
use crate::summary::Check;
use crate::LabError;

fn basis_kind(p: &Params) -> Result<BasisKind, LabError> {
    match p.str("basis") {
        "hermite" => Ok(BasisKind::HermiteAnalytic),
        "monomial" => Ok(BasisKind::GramSchmidtMonomials),
        other => Err(LabError::config(format!("parameter `basis` must be \"hermite\" or \"monomial\", got {other:?}"))),
    }
}

/// Wiener process started at 0, seen at `t0`: ρ = N(0, 2νt0), v = x/(2t0).
fn wiener_operators(p: &Params) -> Result<(WeightedBasis, HydroFields, OperatorSet), LabError> {
    positive(p, &["nu", "t0"])?;
    let (nu, t0) = (p.f64("nu"), p.f64("t0"));
    let s = (2.0 * nu * t0).sqrt();
    let g = UniformGrid::spanning(-14.0 * s, 14.0 * s, p.usize("grid_points")).ok_or_else(|| LabError::config("invalid grid"))?;
    let xs = g.points();
    let ln_rho: Vec<f64> = xs.iter().map(|x| -x * x / (4.0 * nu * t0)).collect();
    let v: Vec<f64> = xs.iter().map(|x| x / (2.0 * t0)).collect();
    let f = HydroFields::from_log_density(g, t0, nu, 1.0, &ln_rho, &v)?;
    let basis = build_basis(g, &f.rho, p.usize("n_basis"), basis_kind(p)?)?;
    let ops = operator_matrices(&basis, &f)?;
    Ok((basis, f, ops))
}

fn block_diff(a: &ComplexMatrix, b: &ComplexMatrix, k: usize) -> f64 {
    a.leading_block(k).max_abs_diff(&b.leading_block(k))
}

const COMMUTATOR_PARAMS: &[ParamSpec] = &[
    float("nu", 0.5, "diffusion constant"),
    float("t0", 1.0, "time at which the Wiener density is taken"),
    int("n_basis", 20, "basis size"),
    int("block", 10, "leading block compared with 2ν·I"),
    text("basis", "hermite", "\"hermite\" or \"monomial\""),
    int("grid_points", 2801, "quadrature grid points"),
];

pub const EMERGENT_COMMUTATOR: Experiment = Experiment {
    name: "emergent_commutator",
    criterion: 7,
    about: "[v̂, x̂] = 2ν on the leading block and the adjoint identity for v̂",
    params: COMMUTATOR_PARAMS,
    quick: &[],
    run: emergent_commutator,
};

fn emergent_commutator(ctx: &Ctx) -> Result<Outcome, LabError> {
    let p = ctx.params;
    let (basis, _, ops) = wiener_operators(p)?;
    let nu = p.f64("nu");
    let (x, v) = (&ops.x_hat.matrix, &ops.v_hat.matrix);
    let block = commutator_block(v, x, nu, p.usize("block"))?;
    let adjoint = ops.adjoint_defect();
    let c = v.commutator(x);

    let mut out = Outcome::default();
    out.metric("commutator_block_defect", block);
    out.metric("adjoint_defect", adjoint);
    out.metric("gram_defect", basis.gram_defect());
    out.metric("commutator_trace", c.trace().re);
    out.check(Check::at_most("commutator_block", block, 1e-8));
    out.check(Check::at_most("adjoint_identity", adjoint, 1e-8));
    write_operator(ctx.out_dir, "x_hat", x)?;
    write_operator(ctx.out_dir, "v_hat", v)?;
    write_operator(ctx.out_dir, "v_hat_adjoint", &ops.v_hat_adjoint.matrix)?;
    write_operator(ctx.out_dir, "commutator", &c)?;
    Ok(out)
}

const CHAIN_PARAMS: &[ParamSpec] = &[float("nu", 0.5, "diffusion constant"), int("grid_points", 1401, "quadrature grid points")];

pub const HAMILTONIAN_CHAIN: Experiment = Experiment {
    name: "hamiltonian_chain",
    criterion: 8,
    about: "three forms of the Hamiltonian expectation agree on Ornstein-Uhlenbeck fields",
    params: CHAIN_PARAMS,
    quick: &[],
    run: hamiltonian_chain,
};

fn hamiltonian_chain(ctx: &Ctx) -> Result<Outcome, LabError> {
    let p = ctx.params;
    positive(p, &["nu"])?;
    let nu = p.f64("nu");
    // stationary OU with b = −x: ρ = N(0, ν), v = 0, U = −x²/2
    let s = nu.sqrt();
    let g = UniformGrid::spanning(-14.0 * s, 14.0 * s, p.usize("grid_points")).ok_or_else(|| LabError::config("invalid grid"))?;
    let xs = g.points();
    let ln_rho: Vec<f64> = xs.iter().map(|x| -x * x / (2.0 * nu)).collect();
    let stationary = HydroFields::from_log_density(g, 0.0, nu, 1.0, &ln_rho, &vec![0.0; g.n])?;
    let pot: Vec<f64> = xs.iter().map(|x| -x * x / 2.0).collect();
    let h = hamiltonian_expectation(&stationary, &pot)?;
    // displaced state with a nonzero current velocity
    let ln_moving: Vec<f64> = xs.iter().map(|x| -(x - 0.3 * s) * (x - 0.3 * s) / (2.0 * nu)).collect();
    let v: Vec<f64> = xs.iter().map(|x| 0.2 + 0.1 * x).collect();
    let moving = HydroFields::from_log_density(g, 0.0, nu, 1.0, &ln_moving, &v)?;
    let hm = hamiltonian_expectation(&moving, &pot)?;

    let mut out = Outcome::default();
    out.metric("form_67", h.form_67);
    out.metric("form_68", h.form_68);
    out.metric("form_70", h.form_70);
    out.metric("moving_form_67", hm.form_67);
    out.metric("moving_form_68", hm.form_68);
    out.metric("moving_form_70", hm.form_70);
    out.check(Check::at_most("forms_spread", h.spread(), 1e-8));
    out.check(Check::at_most("forms_spread_moving", hm.spread(), 1e-8));
    Ok(out)
}

const FLOW_PARAMS: &[ParamSpec] = &[
    float("nu", 0.5, "diffusion constant"),
    float("t0", 1.0, "time at which the Wiener density is taken"),
    int("n_basis", 20, "basis size"),
    text("basis", "hermite", "\"hermite\" or \"monomial\""),
    int("grid_points", 2801, "quadrature grid points"),
    float("dt", 0.01, "flow step"),
    float("horizon", 1.0, "flow duration"),
    int("linear_block", 18, "leading block compared with x̂ + t·v̂"),
    int("block", 10, "leading block of the commutator"),
];

pub const HEISENBERG_FLOW: Experiment = Experiment {
    name: "heisenberg_flow",
    criterion: 9,
    about: "free Heisenberg flow is linear in time and preserves the commutator block",
    params: FLOW_PARAMS,
    quick: &[],
    run: heisenberg_flow_run,
};

fn heisenberg_flow_run(ctx: &Ctx) -> Result<Outcome, LabError> {
    let p = ctx.params;
    positive(p, &["dt", "horizon"])?;
    let (_, _, ops) = wiener_operators(p)?;
    let (nu, t0, dt) = (p.f64("nu"), p.f64("t0"), p.f64("dt"));
    let steps = step_of(p.f64("horizon"), dt)?;
    let (x, v) = (ops.x_hat.matrix, ops.v_hat.matrix);
    let lb = p.usize("linear_block").min(x.dim());
    let h = hamiltonian_operator(&x, &v, &[], None);
    let flow = heisenberg_flow(&x, &v, &h, nu, t0, dt, steps)?;

    let mut rows = Vec::with_capacity(steps + 1);
    let (mut linear, mut comm, mut energy) = (0.0_f64, 0.0_f64, 0.0_f64);
    let e0 = flow.energy(0, &[]);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let l = block_diff(&flow.x[k], &x.axpy(t, &v), lb).max(block_diff(&flow.v[k], &v, lb));
        let c = commutator_block(&flow.v[k], &flow.x[k], nu, p.usize("block"))?;
        let e = (flow.energy(k, &[]) - e0).abs();
        linear = linear.max(l);
        comm = comm.max(c);
        energy = energy.max(e);
        rows.push(vec![k.into(), flow.time(k).into(), l.into(), c.into(), e.into()]);
    }

    let mut out = Outcome::default();
    out.metric("linear_defect", linear);
    out.metric("commutator_defect", comm);
    out.metric("energy_drift", energy);
    out.check(Check::at_most("free_flow_linear", linear, 1e-8));
    out.check(Check::at_most("commutator_preserved", comm, 1e-6));
    ctx.csv("heisenberg.csv", &["step", "t", "linear_defect", "commutator_defect", "energy_drift"], rows)?;
    write_operator(ctx.out_dir, "x_hat_final", &flow.x[steps])?;
    Ok(out)
}

const MOMENT_PARAMS: &[ParamSpec] = &[
    float("nu", 0.5, "diffusion constant"),
    float("t0", 1.0, "flow anchor time"),
    int("n_basis", 20, "basis size"),
    text("basis", "hermite", "\"hermite\" or \"monomial\""),
    int("grid_points", 2801, "quadrature grid points"),
    float("dt", 0.1, "flow and path step"),
    float("horizon", 1.0, "flow duration"),
    float("t1", 1.2, "earliest time"),
    float("t2", 1.7, "latest time"),
    float("t_mid", 1.5, "middle time of the three-point moment"),
    int("paths", 1_000_000, "Monte Carlo paths"),
];

pub const TIME_ORDERED_MOMENTS: Experiment = Experiment {
    name: "time_ordered_moments",
    criterion: 10,
    about: "operator moments (1, x̂(tₙ)…x̂(t₁)1) against Wiener path averages",
    params: MOMENT_PARAMS,
    quick: &[("paths", QuickValue::Int(20_000))],
    run: time_ordered_moments,
};

fn time_ordered_moments(ctx: &Ctx) -> Result<Outcome, LabError> {
    let p = ctx.params;
    positive(p, &["dt", "horizon", "t1", "t2", "t_mid"])?;
    let (_, _, ops) = wiener_operators(p)?;
    let (nu, t0, dt) = (p.f64("nu"), p.f64("t0"), p.f64("dt"));
    let (t1, tm, t2) = (p.f64("t1"), p.f64("t_mid"), p.f64("t2"));
    if !(t0 <= t1 && t1 < tm && tm < t2) {
        return Err(LabError::config("times must satisfy t0 <= t1 < t_mid < t2"));
    }
    let (x, v) = (ops.x_hat.matrix, ops.v_hat.matrix);
    let h = hamiltonian_operator(&x, &v, &[], None);
    let flow = heisenberg_flow(&x, &v, &h, nu, t0, dt, step_of(p.f64("horizon"), dt)?)?;
    let op1 = time_ordered_moment(&flow, &[tm])?;
    let op2 = time_ordered_moment(&flow, &[t1, t2])?;
    let op3 = time_ordered_moment(&flow, &[t1, tm, t2])?;

    // Euler-Maruyama is exact for b = 0, so paths share the flow step
    let (s1, sm, s2) = (step_of(t1, dt)?, step_of(tm, dt)?, step_of(t2, dt)?);
    let cfg = SimulationConfig::new(nu, dt, s2, p.usize("paths")).recording(Record::Steps(vec![s1, sm, s2]));
    let ens = par::simulate(&AnalyticDrift(|_: f64, _: f64| 0.0), &FixedStart(0.0), &cfg, ctx.stream(0))?;
    let (a, b, c) = (ens.column(s1)?, ens.column(sm)?, ens.column(s2)?);
    let mc1 = MeanEstimate::from_samples(b.iter().copied());
    let mc2 = MeanEstimate::from_samples(a.iter().zip(&c).map(|(p, q)| p * q));
    let mc3 = MeanEstimate::from_samples((0..a.len()).map(|i| a[i] * b[i] * c[i]));

    let mut out = Outcome::default();
    out.metric("operator_two_point", op2);
    out.metric("exact_two_point", 2.0 * nu * t1);
    out.metric("mc_two_point", mc2.mean);
    out.metric("mc_two_point_stderr", mc2.stderr);
    out.metric("mc_one_point_z", mc1.z_score(op1));
    out.metric("mc_three_point_z", mc3.z_score(op3));
    out.check(Check::at_most("operator_vs_exact", (op2 - 2.0 * nu * t1).abs(), 1e-8));
    out.check(Check::at_most("operator_vs_paths_z", mc2.z_score(op2).abs(), 3.0));
    let fmt = |ts: &[f64]| ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(";");
    let rows = [(1usize, fmt(&[tm]), op1, mc1), (2, fmt(&[t1, t2]), op2, mc2), (3, fmt(&[t1, tm, t2]), op3, mc3)]
        .into_iter()
        .map(|(n, ts, op, mc)| vec![n.into(), ts.as_str().into(), op.into(), mc.mean.into(), mc.stderr.into()]);
    ctx.csv("moments.csv", &["order", "times", "operator", "mc_mean", "mc_stderr"], rows)?;
    Ok(out)
}
