use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{DiffusionEnsemble, DiffusionError, Drift};
use crate::numkit::stats::MeanEstimate;

#[derive(Debug, Clone, PartialEq)]
pub struct KineticTerms {
    /// Mean of `½ (Δ₁/dt)²`: carries the `ν/dt` divergence.
    pub overlapping: MeanEstimate,
    /// Mean of `½ (Δ₁/dt)(Δ₂/dt)` over adjacent increments.
    pub nonoverlapping: MeanEstimate,
}

/// Kinetic estimators from the increments `Δ₁ = x(t+dt) - x(t)` and `Δ₂ = x(t+2dt) - x(t+dt)`.
pub fn kinetic_action_terms(ens: &DiffusionEnsemble, step: usize) -> Result<KineticTerms, DiffusionError> {
    if step + 2 > ens.steps {
        return Err(DiffusionError::InvalidParameter("kinetic terms need step + 2 <= steps"));
    }
    let x0 = ens.column(step)?;
    let x1 = ens.column(step + 1)?;
    let x2 = ens.column(step + 2)?;
    let dt = ens.dt;
    let d1: Vec<f64> = x1.iter().zip(&x0).map(|(b, a)| (b - a) / dt).collect();
    let d2: Vec<f64> = x2.iter().zip(&x1).map(|(b, a)| (b - a) / dt).collect();
    Ok(KineticTerms {
        overlapping: MeanEstimate::from_samples(d1.iter().map(|d| 0.5 * d * d)),
        nonoverlapping: MeanEstimate::from_samples(d1.iter().zip(&d2).map(|(a, b)| 0.5 * a * b)),
    })
}

/// Weighted least-squares fit `value = intercept + slope / dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseDtFit {
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub intercept_stderr: f64,
}

pub fn fit_inverse_dt(points: &[(f64, MeanEstimate)]) -> Result<InverseDtFit, DiffusionError> {
    if points.len() < 2 {
        return Err(DiffusionError::InvalidParameter("need at least two step sizes"));
    }
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (dt, est) in points {
        if !(*dt > 0.0) {
            return Err(DiffusionError::InvalidParameter("dt must be positive"));
        }
        let w = if est.stderr > 0.0 { 1.0 / (est.stderr * est.stderr) } else { 1.0 };
        let x = 1.0 / dt;
        s += w;
        sx += w * x;
        sy += w * est.mean;
        sxx += w * x * x;
        sxy += w * x * est.mean;
    }
    let det = s * sxx - sx * sx;
    if !(det > 0.0) {
        return Err(DiffusionError::InvalidParameter("step sizes must differ"));
    }
    Ok(InverseDtFit {
        slope: (s * sxy - sx * sy) / det,
        slope_stderr: (s / det).sqrt(),
        intercept: (sxx * sy - sx * sxy) / det,
        intercept_stderr: (sxx / det).sqrt(),
    })
}

/// Lagrangian evaluated with `Dx -> b`, `D_*x -> b_*`, unit mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LagrangianKind {
    /// `¼ (b² + b_*²) - V`
    Yasue,
    /// `½ b b_* - V`
    Dissipative,
    /// `½ ((b² + b_*²)/2 - β/8 (b - b_*)²) - V`
    Generalized { beta: f64 },
}

impl LagrangianKind {
    pub fn eval(&self, b: f64, b_star: f64, v: f64) -> f64 {
        match *self {
            Self::Yasue => 0.25 * (b * b + b_star * b_star) - v,
            Self::Dissipative => 0.5 * b * b_star - v,
            Self::Generalized { beta } => {
                let d = b - b_star;
                0.5 * (0.5 * (b * b + b_star * b_star) - beta / 8.0 * d * d) - v
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Coefficient of a fitted `1/dt` term, when one was fitted.
    pub divergent_coefficient: Option<f64>,
}

/// Ensemble-and-time average of the Lagrangian along the recorded path points.
///
/// Each path contributes its time average; the stderr comes from the spread of
/// those per-path averages. Paths touching unpopulated drift nodes make the
/// estimate fail with the offending node indices.
pub fn yasue_action_estimate<B, S, V>(ens: &DiffusionEnsemble, b: &B, b_star: &S, potential: V, kind: LagrangianKind) -> Result<ActionEstimate, DiffusionError>
where
    B: Drift + ?Sized,
    S: Drift + ?Sized,
    V: Fn(f64) -> f64,
{
    let steps = ens.recorded_steps();
    let mut empty: Vec<usize> = Vec::new();
    let mut per_path = Vec::with_capacity(ens.n_paths());
    for p in 0..ens.n_paths() {
        let row = ens.path(p);
        let mut acc = 0.0;
        for (&k, &x) in steps.iter().zip(row) {
            let t = ens.time(k);
            let fb = b.eval(x, t);
            let fs = b_star.eval(x, t);
            empty.extend(fb.unpopulated.iter().chain(fs.unpopulated.iter()));
            acc += kind.eval(fb.value, fs.value, potential(x));
        }
        per_path.push(acc / steps.len() as f64);
    }
    if !empty.is_empty() {
        empty.sort_unstable();
        empty.dedup();
        return Err(DiffusionError::EmptyBins(empty));
    }
    let est = MeanEstimate::from_samples(per_path);
    Ok(ActionEstimate { value: est.mean, stderr: est.stderr, divergent_coefficient: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{simulate_ensemble, AnalyticDrift, DriftField, FixedStart, GaussianStart, Record, SimulationConfig};
    use crate::numkit::{RngStream, UniformGrid};
    use alloc::vec;
    use proptest::prelude::*;

    fn run(nu: f64, dt: f64, steps: usize, n: usize, b: impl Fn(f64, f64) -> f64, x0: f64, seed: u64) -> DiffusionEnsemble {
        let cfg = SimulationConfig::new(nu, dt, steps, n);
        simulate_ensemble(&AnalyticDrift(b), &FixedStart(x0), &cfg, RngStream::new(seed, 0)).unwrap()
    }

    #[test]
    fn overlapping_slope_is_nu() {
        let nu = 0.5;
        let pts: Vec<(f64, MeanEstimate)> = [0.04, 0.02, 0.01, 0.005]
            .iter()
            .enumerate()
            .map(|(i, &dt)| (dt, kinetic_action_terms(&run(nu, dt, 2, 40_000, |_, _| 0.0, 0.0, 20 + i as u64), 0).unwrap().overlapping))
            .collect();
        let fit = fit_inverse_dt(&pts).unwrap();
        assert!((fit.slope - nu).abs() < 0.05 * nu, "{fit:?}");
    }

    #[test]
    fn wiener_nonoverlapping_vanishes() {
        for (i, dt) in [0.02, 0.005].into_iter().enumerate() {
            let k = kinetic_action_terms(&run(0.5, dt, 3, 50_000, |_, _| 0.0, 0.0, 30 + i as u64), 1).unwrap();
            assert!(k.nonoverlapping.within_sigmas(0.0, 3.0), "{:?}", k.nonoverlapping);
        }
    }

    #[test]
    fn constant_drift_nonoverlapping() {
        let c = 1.3;
        let k = kinetic_action_terms(&run(0.01, 0.01, 2, 50_000, move |_, _| c, 0.0, 40), 0).unwrap();
        assert!(k.nonoverlapping.within_sigmas(0.5 * c * c, 3.0), "{:?}", k.nonoverlapping);
    }

    #[test]
    fn euler_maruyama_oracle_for_linear_drift() {
        // b = -x from a fixed x0: E[½Δ₁Δ₂]/dt² = ½x0²(1-dt) - ν, E[½Δ₁²]/dt² = ½x0² + ν/dt
        let (nu, dt, x0) = (0.5, 0.05, 1.5);
        let k = kinetic_action_terms(&run(nu, dt, 2, 200_000, |x, _| -x, x0, 41), 0).unwrap();
        assert!(k.nonoverlapping.within_sigmas(0.5 * x0 * x0 * (1.0 - dt) - nu, 3.0), "{:?}", k.nonoverlapping);
        assert!(k.overlapping.within_sigmas(0.5 * x0 * x0 + nu / dt, 3.0), "{:?}", k.overlapping);
    }

    #[test]
    fn kinds_agree_without_diffusion() {
        let c = 0.7;
        let e = run(0.0, 0.01, 50, 20, move |_, _| c, 0.0, 1);
        let b = AnalyticDrift(move |_: f64, _: f64| c);
        let v = |x: f64| 0.5 * x * x;
        let vals: Vec<ActionEstimate> = [LagrangianKind::Yasue, LagrangianKind::Dissipative, LagrangianKind::Generalized { beta: 1.2 }]
            .iter()
            .map(|&k| yasue_action_estimate(&e, &b, &b, v, k).unwrap())
            .collect();
        for w in vals.windows(2) {
            assert!((w[0].value - w[1].value).abs() <= 1e-12 + w[0].stderr);
        }
    }

    #[test]
    fn ground_state_quadrature_oracle() {
        // b = -x, b_* = x, stationary rho ∝ exp(-x²/2ν); V = x² so L = -x²/2
        let nu = 0.5;
        let cfg = SimulationConfig::new(nu, 0.01, 20, 20_000).recording(Record::Every(5));
        let e = simulate_ensemble(&AnalyticDrift(|x: f64, _: f64| -x), &GaussianStart { mean: 0.0, sd: nu.sqrt() }, &cfg, RngStream::new(42, 0)).unwrap();
        let v = |x: f64| x * x;
        let est = yasue_action_estimate(&e, &AnalyticDrift(|x: f64, _: f64| -x), &AnalyticDrift(|x: f64, _: f64| x), v, LagrangianKind::Yasue).unwrap();
        let g = UniformGrid::spanning(-8.0, 8.0, 4001).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for x in g.points() {
            let rho = (-x * x / (2.0 * nu)).exp();
            num += rho * LagrangianKind::Yasue.eval(-x, x, v(x));
            den += rho;
        }
        let oracle = num / den;
        assert!((est.value - oracle).abs() < 3.0 * est.stderr, "{est:?} vs {oracle}");
    }

    #[test]
    fn empty_bins_are_reported() {
        let g = UniformGrid::spanning(-1.0, 1.0, 5).unwrap();
        let f = DriftField::stationary(g, vec![0.0; 5]).unwrap().with_mask(vec![vec![true, true, true, false, false]]).unwrap();
        let e = run(0.0, 0.1, 2, 3, |_, _| 0.0, 0.75, 1);
        let err = yasue_action_estimate(&e, &f, &f, |_| 0.0, LagrangianKind::Yasue).unwrap_err();
        assert_eq!(err, DiffusionError::EmptyBins(vec![3]));
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        let m = MeanEstimate { mean: 1.0, stderr: 0.1, n: 10 };
        assert!(fit_inverse_dt(&[(0.1, m)]).is_err());
        assert!(fit_inverse_dt(&[(0.1, m), (0.1, m)]).is_err());
    }

    proptest! {
        #[test]
        fn generalized_at_zero_beta_is_yasue(b in -10.0..10.0f64, s in -10.0..10.0f64, v in -5.0..5.0f64) {
            prop_assert_eq!(LagrangianKind::Generalized { beta: 0.0 }.eval(b, s, v), LagrangianKind::Yasue.eval(b, s, v));
        }

        #[test]
        fn kinds_coincide_when_drifts_equal(b in -10.0..10.0f64, beta in -4.0..2.0f64, v in -5.0..5.0f64) {
            let y = LagrangianKind::Yasue.eval(b, b, v);
            prop_assert!((LagrangianKind::Dissipative.eval(b, b, v) - y).abs() < 1e-12);
            let g = LagrangianKind::Generalized { beta }.eval(b, b, v);
            prop_assert!((g - y).abs() < 1e-12);
        }
    }
}
