use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{polychotomic_select, sample_alpha, HiddenError, HiddenPair, Observable, UNITARITY_TOL};
use crate::numkit::stats::{chi_square_homogeneity, ChiSquare, MeanEstimate};
use crate::numkit::{complex_gaussian, hermitian_eigh, ComplexMatrix, HaarMethod, RngStream, StreamRng};
use crate::Complex64;

/// How the hidden vector moves between observations.
#[derive(Debug, Clone, PartialEq)]
pub enum EvolutionSpec {
    /// The same propagator as `ψ`.
    Quantum,
    /// `α` never changes.
    Frozen,
    /// Left-multiplication by `exp(i ε G)` with a fresh Gaussian Hermitian `G` each step.
    RandomMarkov { eps: f64 },
    /// Step `j` applies `maps[j % maps.len()]`.
    Custom(Vec<ComplexMatrix>),
}

impl EvolutionSpec {
    pub fn label(&self) -> String {
        match self {
            EvolutionSpec::Quantum => "quantum".into(),
            EvolutionSpec::Frozen => "frozen".into(),
            EvolutionSpec::RandomMarkov { eps } => alloc::format!("random_markov({eps})"),
            EvolutionSpec::Custom(m) => alloc::format!("custom({})", m.len()),
        }
    }

    /// Largest `|U^H U − I|` over the fixed maps (zero for the built-in kinds).
    pub fn unitarity_defect(&self) -> f64 {
        match self {
            EvolutionSpec::Custom(maps) => maps.iter().map(|m| m.unitarity_defect()).fold(0.0, f64::max),
            _ => 0.0,
        }
    }

    fn check(&self, n: usize, require_unitary: bool) -> Result<(), HiddenError> {
        match self {
            EvolutionSpec::RandomMarkov { eps } if !eps.is_finite() => Err(HiddenError::InvalidParameter("eps must be finite")),
            EvolutionSpec::Custom(maps) => {
                if maps.is_empty() || maps.iter().any(|m| m.dim() != n) {
                    return Err(HiddenError::Shape);
                }
                if require_unitary {
                    if let Some((step, defect)) = maps.iter().map(|m| m.unitarity_defect()).enumerate().find(|(_, d)| *d > UNITARITY_TOL) {
                        return Err(HiddenError::NonUnitary { step, defect });
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    // stable per-label stream so a repeated spec reproduces its draws
    fn stream(&self, base: RngStream) -> RngStream {
        let h = self.label().bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
        base.derive(h)
    }
}

fn propagator(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix, HiddenError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(HiddenError::InvalidParameter("dt must be positive"));
    }
    Ok(hermitian_eigh(h)?.apply_fn(|l| Complex64::from_polar(1.0, -l * dt)))
}

fn markov_step(rng: &mut StreamRng, n: usize, eps: f64) -> Result<ComplexMatrix, HiddenError> {
    let a = ComplexMatrix::from_fn(n, |_, _| complex_gaussian(rng));
    let g = (&a + &a.adjoint()).scale_real(0.5);
    Ok(hermitian_eigh(&g)?.apply_fn(|l| Complex64::from_polar(1.0, eps * l)))
}

struct Stepper<'a> {
    u_qm: &'a ComplexMatrix,
    spec: &'a EvolutionSpec,
    rng: StreamRng,
}

impl Stepper<'_> {
    fn alpha_step(&mut self, step: usize, alpha: &[Complex64]) -> Result<Vec<Complex64>, HiddenError> {
        Ok(match self.spec {
            EvolutionSpec::Quantum => self.u_qm.mul_vec(alpha),
            EvolutionSpec::Frozen => alpha.to_vec(),
            EvolutionSpec::RandomMarkov { eps } => markov_step(&mut self.rng, alpha.len(), *eps)?.mul_vec(alpha),
            EvolutionSpec::Custom(maps) => maps[step % maps.len()].mul_vec(alpha),
        })
    }
}

/// `[pair, pair(dt), ..., pair(steps dt)]`; `ψ` moves under `exp(−i H dt)` (ħ = 1),
/// `α` per `spec`, with random increments drawn from `stream`.
pub fn evolve_pair(pair: &HiddenPair, h: &ComplexMatrix, spec: &EvolutionSpec, dt: f64, steps: usize, stream: RngStream) -> Result<Vec<HiddenPair>, HiddenError> {
    if h.dim() != pair.n() {
        return Err(HiddenError::Shape);
    }
    spec.check(pair.n(), true)?;
    let u = propagator(h, dt)?;
    let mut stepper = Stepper { u_qm: &u, spec, rng: stream.rng() };
    let mut out = Vec::with_capacity(steps + 1);
    out.push(pair.clone());
    for step in 0..steps {
        let last = out.last().unwrap();
        let next = HiddenPair { psi: u.mul_vec(&last.psi), alpha: stepper.alpha_step(step, &last.alpha)?, alpha0_norm: pair.alpha0_norm };
        out.push(next);
    }
    Ok(out)
}

/// Piecewise-constant record of the selected level along a pair trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableTrajectory {
    pub t: Vec<f64>,
    pub k: Vec<usize>,
    pub eigenvalue: Vec<f64>,
    pub jump_count: usize,
    /// Run length in steps → number of runs (the final, censored run included).
    pub dwell_histogram: BTreeMap<usize, u64>,
    pub ties: usize,
}

impl ObservableTrajectory {
    /// Fraction of recorded steps spent on each level.
    pub fn occupation(&self, levels: usize) -> Vec<f64> {
        let mut occ = alloc::vec![0.0; levels];
        for k in &self.k {
            occ[*k] += 1.0;
        }
        occ.iter().map(|c| c / self.k.len() as f64).collect()
    }
}

pub fn trajectory(pairs: &[HiddenPair], obs: &Observable, t0: f64, dt: f64) -> Result<ObservableTrajectory, HiddenError> {
    if pairs.is_empty() {
        return Err(HiddenError::InvalidParameter("trajectory is empty"));
    }
    let mut out = ObservableTrajectory { t: Vec::new(), k: Vec::new(), eigenvalue: Vec::new(), jump_count: 0, dwell_histogram: BTreeMap::new(), ties: 0 };
    let mut run = 0usize;
    for (i, pair) in pairs.iter().enumerate() {
        let s = polychotomic_select(pair, obs)?;
        if let Some(&prev) = out.k.last() {
            if prev != s.index {
                out.jump_count += 1;
                *out.dwell_histogram.entry(run).or_insert(0) += 1;
                run = 0;
            }
        }
        run += 1;
        out.ties += s.tie as usize;
        out.t.push(t0 + i as f64 * dt);
        out.k.push(s.index);
        out.eigenvalue.push(s.eigenvalue);
    }
    *out.dwell_histogram.entry(run).or_insert(0) += 1;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpStatistics {
    pub label: String,
    pub counts: Vec<usize>,
    pub mean: MeanEstimate,
}

/// Jump counts over `n_traj` trajectories of `steps` steps, each with its own Haar `α`.
#[allow(clippy::too_many_arguments)]
pub fn jump_statistics(
    psi0: &[Complex64],
    obs: &Observable,
    h: &ComplexMatrix,
    spec: &EvolutionSpec,
    alpha0: &[Complex64],
    dt: f64,
    steps: usize,
    n_traj: usize,
    stream: RngStream,
    method: HaarMethod,
) -> Result<JumpStatistics, HiddenError> {
    let stream = spec.stream(stream);
    let norm0 = crate::numkit::norm(alpha0);
    let counts = (0..n_traj)
        .map(|i| {
            let s = stream.derive(i as u64);
            let pair = HiddenPair::new(psi0.to_vec(), sample_alpha(alpha0, s, method)?, norm0)?;
            let traj = evolve_pair(&pair, h, spec, dt, steps, s.derive(1))?;
            Ok(trajectory(&traj, obs, 0.0, dt)?.jump_count)
        })
        .collect::<Result<Vec<usize>, HiddenError>>()?;
    let mean = MeanEstimate::from_samples(counts.iter().map(|c| *c as f64));
    Ok(JumpStatistics { label: spec.label(), counts, mean })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecFrequencies {
    pub label: String,
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    pub unitarity_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub specs: Vec<SpecFrequencies>,
    /// `(i, j, test)` for every pair `i < j`.
    pub pairwise: Vec<(usize, usize, ChiSquare)>,
    pub min_p_value: f64,
    /// Specs whose maps are not unitary.
    pub flagged: Vec<usize>,
}

impl InvarianceReport {
    pub fn invariant(&self, alpha: f64) -> bool {
        self.flagged.is_empty() && self.min_p_value > alpha
    }
}

/// Selection frequencies at `horizon` steps for each spec, from `n_samples` Haar
/// initial vectors, and pairwise homogeneity tests. Non-unitary maps are run, not
/// rejected, and flagged.
#[allow(clippy::too_many_arguments)]
pub fn ur_invariance_test(
    psi0: &[Complex64],
    obs: &Observable,
    h: &ComplexMatrix,
    specs: &[EvolutionSpec],
    alpha0: &[Complex64],
    dt: f64,
    horizon: usize,
    n_samples: usize,
    stream: RngStream,
    method: HaarMethod,
) -> Result<InvarianceReport, HiddenError> {
    if specs.len() < 2 {
        return Err(HiddenError::InvalidParameter("at least two specs are required"));
    }
    let n = obs.n();
    if psi0.len() != n || alpha0.len() != n || h.dim() != n {
        return Err(HiddenError::Shape);
    }
    let u = propagator(h, dt)?;
    let mut psi = psi0.to_vec();
    for _ in 0..horizon {
        psi = u.mul_vec(&psi);
    }
    let norm0 = crate::numkit::norm(alpha0);
    let mut out = Vec::with_capacity(specs.len());
    let mut flagged = Vec::new();
    for (idx, spec) in specs.iter().enumerate() {
        spec.check(n, false)?;
        let defect = spec.unitarity_defect();
        if defect > UNITARITY_TOL {
            flagged.push(idx);
        }
        let base = spec.stream(stream);
        let mut counts = alloc::vec![0u64; n];
        for i in 0..n_samples {
            let s = base.derive(i as u64);
            let mut alpha = sample_alpha(alpha0, s, method)?;
            let mut stepper = Stepper { u_qm: &u, spec, rng: s.derive(1).rng() };
            for step in 0..horizon {
                alpha = stepper.alpha_step(step, &alpha)?;
            }
            let pair = HiddenPair { psi: psi.clone(), alpha, alpha0_norm: norm0 };
            counts[polychotomic_select(&pair, obs)?.index] += 1;
        }
        let frequencies = counts.iter().map(|c| *c as f64 / n_samples as f64).collect();
        out.push(SpecFrequencies { label: spec.label(), counts, frequencies, unitarity_defect: defect });
    }
    let mut pairwise = Vec::new();
    for i in 0..out.len() {
        for j in i + 1..out.len() {
            pairwise.push((i, j, chi_square_homogeneity(&out[i].counts, &out[j].counts)));
        }
    }
    let min_p_value = pairwise.iter().map(|(_, _, c)| c.p_value).fold(1.0, f64::min);
    Ok(InvarianceReport { specs: out, pairwise, min_p_value, flagged })
}
