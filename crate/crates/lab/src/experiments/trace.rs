use stochtrace_core::tracedyn::{directional_check, hamilton_flow, Symbol, TracePhaseSpace, TracePolynomial};

use super::diffusion::{positive, step_of};
use super::{Ctx, Experiment, Outcome, QuickValue};
use crate::config::{float, int, ParamSpec};
use crate::summary::Check;
use crate::LabError;

fn dims(dim: usize, dof: usize) -> Result<(), LabError> {
    if dim == 0 || dof == 0 || dim > 64 {
        return Err(LabError::config("`dim` must be in 1..=64 and `dof` positive"));
    }
    Ok(())
}

const CONSERVATION_PARAMS: &[ParamSpec] = &[
    int("dim", 4, "matrix dimension"),
    int("dof", 2, "degrees of freedom"),
    float("quartic", 0.1, "coefficient of Tr q⁴"),
    float("dt", 1e-3, "integration step"),
    float("horizon", 10.0, "integration time"),
    int("export_every", 1, "step stride in trace_flow.csv"),
];

pub const TRACE_CONSERVATION: Experiment = Experiment {
    name: "trace_conservation",
    criterion: 11,
    about: "trace Hamiltonian and the traceless charge are conserved by the matrix flow",
    params: CONSERVATION_PARAMS,
    quick: &[],
    run: trace_conservation,
};

fn trace_conservation(ctx: &Ctx) -> Result<Outcome, LabError> {
    let p = ctx.params;
    positive(p, &["dt", "horizon"])?;
    let (dim, dof) = (p.usize("dim"), p.usize("dof"));
    dims(dim, dof)?;
    let dt = p.f64("dt");
    let steps = step_of(p.f64("horizon"), dt)?;
    let s0 = TracePhaseSpace::random(ctx.stream(0), dof, dim, true);
    let h = TracePolynomial::anharmonic(dof, p.f64("quartic"));
    let flow = hamilton_flow(&h, &s0, dt, steps)?;
    let energies = flow.energies();
    let charges = flow.millard();
    let traces: Vec<f64> = charges.iter().map(|c| c.trace().norm()).collect();
    let max_trace = traces.iter().copied().fold(0.0, f64::max);

    let mut out = Outcome::default();
    out.metric("energy_initial", energies[0].re);
    out.metric("energy_drift", flow.max_energy_drift());
    out.metric("millard_drift", flow.max_millard_drift());
    out.metric("millard_trace", max_trace);
    out.metric("hermiticity_defect", flow.max_hermiticity_defect());
    out.check(Check::at_most("energy_conserved", flow.max_energy_drift(), 1e-8));
    out.check(Check::at_most("millard_conserved", flow.max_millard_drift(), 1e-6));
    out.check(Check::at_most("millard_traceless", max_trace, 1e-12));

    let every = p.usize("export_every").max(1);
    let rows = (0..=steps)
        .step_by(every)
        .map(|k| vec![k.into(), flow.time(k).into(), energies[k].re.into(), charges[k].axpy(-1.0, &charges[0]).frobenius_norm().into(), traces[k].into()]);
    ctx.csv("trace_flow.csv", &["step", "t", "traceH", "millard_frobenius", "millard_trace"], rows)?;
    Ok(out)
}

const DERIVATIVE_PARAMS: &[ParamSpec] = &[
    int("polynomials", 100, "random polynomials"),
    int("dof", 2, "degrees of freedom"),
    int("max_degree", 4, "maximum word length"),
    int("terms", 5, "terms per polynomial"),
    int("max_dim", 6, "matrix dimensions cycle through 1..=max_dim"),
    float("eps", 1e-4, "central-difference step"),
];

pub const TRACE_DERIVATIVE: Experiment = Experiment {
    name: "trace_derivative",
    criterion: 12,
    about: "cyclic derivatives of trace polynomials against central differences",
    params: DERIVATIVE_PARAMS,
    quick: &[("polynomials", QuickValue::Int(10))],
    run: trace_derivative,
};

fn trace_derivative(ctx: &Ctx) -> Result<Outcome, LabError> {
    let p = ctx.params;
    positive(p, &["eps"])?;
    let (dof, max_dim) = (p.usize("dof"), p.usize("max_dim"));
    dims(max_dim, dof)?;
    if p.usize("max_degree") == 0 || p.usize("terms") == 0 {
        return Err(LabError::config("`max_degree` and `terms` must be positive"));
    }
    let mut rows = Vec::new();
    let mut worst = 0.0_f64;
    for k in 0..p.u64("polynomials") {
        let stream = ctx.stream(k);
        let dim = 1 + (k as usize % max_dim);
        let poly = TracePolynomial::random(&mut stream.rng(), dof, p.usize("max_degree"), p.usize("terms"));
        let s = TracePhaseSpace::random(stream.derive(1), dof, dim, false);
        let e = TracePhaseSpace::random(stream.derive(2), dof, dim, false);
        for sym in (0..dof).map(Symbol::Q).chain((0..dof).map(Symbol::P)) {
            let (fd, an) = directional_check(&poly, &s, sym, e.get(sym), p.f64("eps"))?;
            let err = (fd - an).norm();
            worst = worst.max(err);
            rows.push(vec![k.into(), dim.into(), poly.degree().into(), sym.to_string().as_str().into(), fd.re.into(), fd.im.into(), an.re.into(), an.im.into(), err.into()]);
        }
    }
    let mut out = Outcome::default();
    out.metric("max_error", worst);
    out.check(Check::at_most("directional_derivatives", worst, 1e-6));
    ctx.csv("trace_derivative.csv", &["poly", "dim", "degree", "symbol", "fd_re", "fd_im", "symbolic_re", "symbolic_im", "error"], rows)?;
    Ok(out)
}
