use alloc::vec;
use alloc::vec::Vec;

use super::{HiddenError, MAX_DIM, NORM_TOL};
use crate::numkit::stats::{chi_square_gof, ChiSquare};
use crate::numkit::{complex_gaussian, haar_unitary, hermitian_eigh, inner, norm, ComplexMatrix, HaarMethod, RngStream};
use crate::Complex64;

/// State vector `ψ` and hidden vector `α` with its fixed norm.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenPair {
    pub psi: Vec<Complex64>,
    pub alpha: Vec<Complex64>,
    pub alpha0_norm: f64,
}

impl HiddenPair {
    pub fn new(psi: Vec<Complex64>, alpha: Vec<Complex64>, alpha0_norm: f64) -> Result<Self, HiddenError> {
        check_dim(psi.len())?;
        if alpha.len() != psi.len() {
            return Err(HiddenError::Shape);
        }
        check_norm(&psi, 1.0)?;
        check_norm(&alpha, alpha0_norm)?;
        Ok(Self { psi, alpha, alpha0_norm })
    }

    pub fn n(&self) -> usize {
        self.psi.len()
    }
}

fn check_dim(n: usize) -> Result<(), HiddenError> {
    if !(2..=MAX_DIM).contains(&n) {
        return Err(HiddenError::Dimension(n));
    }
    Ok(())
}

fn check_norm(v: &[Complex64], expected: f64) -> Result<(), HiddenError> {
    let found = norm(v);
    if !((found - expected).abs() <= NORM_TOL * expected.max(1.0)) {
        return Err(HiddenError::Norm { expected, found });
    }
    Ok(())
}

/// Hermitian observable with its ascending eigenvalues and eigenvectors (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub matrix: ComplexMatrix,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
    basis: Vec<Vec<Complex64>>,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, HiddenError> {
        check_dim(matrix.dim())?;
        let e = hermitian_eigh(&matrix)?;
        let basis = (0..matrix.dim()).map(|k| e.vectors.column(k)).collect();
        Ok(Self { matrix, eigenvalues: e.values, eigenvectors: e.vectors, basis })
    }

    /// GUE-distributed observable.
    pub fn random(stream: RngStream, n: usize) -> Result<Self, HiddenError> {
        let mut rng = stream.rng();
        let g = ComplexMatrix::from_fn(n, |_, _| complex_gaussian(&mut rng));
        Self::new((&g + &g.adjoint()).scale_real(0.5))
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> &[Complex64] {
        &self.basis[k]
    }

    /// `⟨φ_k|v⟩` for every k.
    pub fn amplitudes(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.basis.iter().map(|phi| inner(phi, v)).collect()
    }

    /// `|⟨φ_k|ψ⟩|²`.
    pub fn probabilities(&self, psi: &[Complex64]) -> Vec<f64> {
        self.amplitudes(psi).iter().map(|a| a.norm_sqr()).collect()
    }

    /// `max_k |A φ_k − A_k φ_k|`.
    pub fn residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (k, phi) in self.basis.iter().enumerate() {
            let a = self.matrix.mul_vec(phi);
            worst = a.iter().zip(phi).map(|(x, p)| (x - p * self.eigenvalues[k]).norm()).fold(worst, f64::max);
        }
        worst
    }
}

/// Uniformly random unit vector.
pub fn random_state(stream: RngStream, n: usize) -> Vec<Complex64> {
    let mut rng = stream.rng();
    let v: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng)).collect();
    let s = norm(&v);
    v.iter().map(|z| z / s).collect()
}

/// `U α₀` for a Haar-random `U`.
pub fn sample_alpha(alpha0: &[Complex64], stream: RngStream, method: HaarMethod) -> Result<Vec<Complex64>, HiddenError> {
    check_dim(alpha0.len())?;
    Ok(haar_unitary(alpha0.len(), stream, method)?.mul_vec(alpha0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub eigenvalue: f64,
    /// `|⟨φ_k|ψ⟩| / |⟨φ_k|α⟩|`; `+∞` for a vanishing denominator, `NaN` for an excluded `0/0`.
    pub ratios: Vec<f64>,
    /// Whether another index attained the same maximum.
    pub tie: bool,
}

pub fn polychotomic_select(pair: &HiddenPair, obs: &Observable) -> Result<Selection, HiddenError> {
    if pair.n() != obs.n() {
        return Err(HiddenError::Shape);
    }
    let ratios: Vec<f64> = obs
        .basis
        .iter()
        .map(|phi| {
            let num = inner(phi, &pair.psi).norm();
            let den = inner(phi, &pair.alpha).norm();
            match (num > 0.0, den > 0.0) {
                (_, true) => num / den,
                (true, false) => f64::INFINITY,
                (false, false) => f64::NAN,
            }
        })
        .collect();
    let mut best: Option<usize> = None;
    let mut tie = false;
    for (k, r) in ratios.iter().enumerate() {
        if r.is_nan() || *r == 0.0 {
            continue;
        }
        match best {
            None => best = Some(k),
            Some(b) if *r > ratios[b] => {
                best = Some(k);
                tie = false;
            }
            Some(b) if *r == ratios[b] => tie = true,
            _ => {}
        }
    }
    let index = best.ok_or(HiddenError::NoSupport)?;
    Ok(Selection { index, eigenvalue: obs.eigenvalues[index], ratios, tie })
}

/// Selection probabilities implied by a Haar `α`: the `|α_k|²` are proportional to
/// i.i.d. unit exponentials `E_k`, so `k` wins when `E_k / p_k` is smallest, an
/// exponential race with rates `p_k`, won by `k` with probability `p_k / Σ p`.
pub fn exponential_race_probabilities(p: &[f64]) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    p.iter().map(|x| x / total).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BornEstimate {
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    /// `|⟨φ_k|ψ⟩|²`.
    pub probabilities: Vec<f64>,
    pub chi_square: ChiSquare,
    pub ties: u64,
}

/// Selection frequencies over `n_samples` independent hidden vectors, sample `i` drawn
/// from `stream.derive(i)`.
pub fn born_estimate(psi: &[Complex64], obs: &Observable, alpha0: &[Complex64], n_samples: usize, stream: RngStream, method: HaarMethod) -> Result<BornEstimate, HiddenError> {
    if n_samples < 1000 {
        return Err(HiddenError::InvalidParameter("at least 1000 samples are required"));
    }
    let counts_ties = (0..n_samples).try_fold((vec![0u64; obs.n()], 0u64), |(mut counts, mut ties), i| {
        let alpha = sample_alpha(alpha0, stream.derive(i as u64), method)?;
        let pair = HiddenPair { psi: psi.to_vec(), alpha, alpha0_norm: norm(alpha0) };
        let s = polychotomic_select(&pair, obs)?;
        counts[s.index] += 1;
        ties += s.tie as u64;
        Ok::<_, HiddenError>((counts, ties))
    })?;
    born_from_counts(psi, obs, counts_ties.0, counts_ties.1)
}

/// Builds the report from externally gathered counts (e.g. a parallel driver).
pub fn born_from_counts(psi: &[Complex64], obs: &Observable, counts: Vec<u64>, ties: u64) -> Result<BornEstimate, HiddenError> {
    if psi.len() != obs.n() || counts.len() != obs.n() {
        return Err(HiddenError::Shape);
    }
    check_norm(psi, 1.0)?;
    let total: u64 = counts.iter().sum();
    let probabilities = obs.probabilities(psi);
    let frequencies = counts.iter().map(|c| *c as f64 / total as f64).collect();
    let chi_square = chi_square_gof(&counts, &probabilities);
    Ok(BornEstimate { counts, frequencies, probabilities, chi_square, ties })
}

/// `(ψ + λ α) / ‖ψ + λ α‖`.
pub fn signal_noise_state(psi: &[Complex64], alpha: &[Complex64], lambda: f64) -> Result<Vec<Complex64>, HiddenError> {
    if psi.len() != alpha.len() {
        return Err(HiddenError::Shape);
    }
    if !lambda.is_finite() {
        return Err(HiddenError::InvalidParameter("lambda must be finite"));
    }
    let v: Vec<Complex64> = psi.iter().zip(alpha).map(|(p, a)| p + a * lambda).collect();
    let s = norm(&v);
    if s == 0.0 {
        return Err(HiddenError::Cancellation);
    }
    Ok(v.iter().map(|z| z / s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::stats::{ks_two_sample, MeanEstimate};
    use rand_distr::{Distribution, Exp1};

    fn e0(n: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[0] = 1.0.into();
        v
    }

    #[test]
    fn alpha_is_uniform_on_the_sphere() {
        let n = 5;
        let a0: Vec<Complex64> = e0(n).iter().map(|z| z * 2.5).collect();
        let samples: Vec<Vec<Complex64>> = (0..10_000).map(|i| sample_alpha(&a0, RngStream::new(1, i), HaarMethod::GramSchmidt).unwrap()).collect();
        assert!(samples.iter().all(|a| (norm(a) - 2.5).abs() < 1e-12));
        for k in 0..n {
            let est = MeanEstimate::from_samples(samples.iter().map(|a| a[k].norm_sqr() / 6.25));
            assert!(est.within_sigmas(1.0 / n as f64, 3.0), "component {k}: {est:?}");
        }
    }

    #[test]
    fn haar_methods_agree_in_distribution() {
        let a0 = e0(4);
        for k in 0..4 {
            let draw = |m| (0..4000).map(|i| sample_alpha(&a0, RngStream::new(2, i), m).unwrap()[k].norm()).collect::<Vec<f64>>();
            let (_, p) = ks_two_sample(&draw(HaarMethod::GramSchmidt), &draw(HaarMethod::ColumnWise));
            assert!(p > 0.01, "component {k}: p = {p}");
        }
    }

    #[test]
    fn eigenstate_is_always_selected() {
        let obs = Observable::random(RngStream::new(3, 0), 4).unwrap();
        assert!(obs.residual() < 1e-10);
        let psi = obs.eigenvector(2).to_vec();
        for i in 0..200 {
            let alpha = sample_alpha(&e0(4), RngStream::new(4, i), HaarMethod::ColumnWise).unwrap();
            let s = polychotomic_select(&HiddenPair::new(psi.clone(), alpha, 1.0).unwrap(), &obs).unwrap();
            assert_eq!(s.index, 2);
        }
        let b = born_estimate(&psi, &obs, &e0(4), 1000, RngStream::new(5, 0), HaarMethod::GramSchmidt).unwrap();
        assert_eq!(b.counts, vec![0, 0, 1000, 0]);
    }

    #[test]
    fn two_level_frequency() {
        // |⟨φ₁|ψ⟩|² = 0.75
        let obs = Observable::new(ComplexMatrix::diag(&[0.0, 1.0])).unwrap();
        let psi = vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.75_f64.sqrt())];
        let b = born_estimate(&psi, &obs, &e0(2), 100_000, RngStream::new(6, 0), HaarMethod::GramSchmidt).unwrap();
        let f = b.frequencies[1];
        let sigma = (0.75 * 0.25 / 1e5_f64).sqrt();
        assert!((f - 0.75).abs() < 3.0 * sigma, "{f}");
        assert!(b.chi_square.p_value > 0.01);
    }

    #[test]
    fn uniform_state_and_random_states() {
        let obs = Observable::random(RngStream::new(7, 0), 4).unwrap();
        let psi: Vec<Complex64> = (0..4).map(|k| obs.eigenvector(k).iter().map(|z| z * 0.5).collect::<Vec<_>>()).fold(vec![Complex64::new(0.0, 0.0); 4], |acc, v| acc.iter().zip(&v).map(|(a, b)| a + b).collect());
        let b = born_estimate(&psi, &obs, &e0(4), 20_000, RngStream::new(8, 0), HaarMethod::ColumnWise).unwrap();
        let sigma = (0.25 * 0.75 / 2e4_f64).sqrt();
        assert!(b.frequencies.iter().all(|f| (f - 0.25).abs() < 3.0 * sigma), "{:?}", b.frequencies);
        let psi = random_state(RngStream::new(9, 0), 4);
        let b = born_estimate(&psi, &obs, &e0(4), 100_000, RngStream::new(10, 0), HaarMethod::GramSchmidt).unwrap();
        assert!(b.chi_square.p_value > 0.01, "{:?}", b.chi_square);
    }

    #[test]
    fn exponential_race_oracle() {
        // direct race with i.i.d. exponentials, independent of any Haar sampling
        let p = [0.1, 0.2, 0.3, 0.4];
        let want = exponential_race_probabilities(&p);
        assert!(want.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-15));
        let mut rng = RngStream::new(11, 0).rng();
        let mut counts = [0u64; 4];
        for _ in 0..100_000 {
            let k = (0..4).map(|k| { let e: f64 = Exp1.sample(&mut rng); (k, e / p[k]) }).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
            counts[k] += 1;
        }
        assert!(chi_square_gof(&counts, &want).p_value > 0.01);
    }

    #[test]
    fn phase_invariance() {
        let obs = Observable::random(RngStream::new(12, 0), 3).unwrap();
        let psi = random_state(RngStream::new(13, 0), 3);
        let ph = Complex64::from_polar(1.0, 0.7);
        for i in 0..100 {
            let a = sample_alpha(&e0(3), RngStream::new(14, i), HaarMethod::GramSchmidt).unwrap();
            let s1 = polychotomic_select(&HiddenPair::new(psi.clone(), a.clone(), 1.0).unwrap(), &obs).unwrap();
            let p2: Vec<Complex64> = psi.iter().map(|z| z * ph).collect();
            let a2: Vec<Complex64> = a.iter().map(|z| z * ph.conj()).collect();
            let s2 = polychotomic_select(&HiddenPair::new(p2, a2, 1.0).unwrap(), &obs).unwrap();
            assert_eq!(s1.index, s2.index);
        }
    }

    #[test]
    fn zero_denominators_and_ties() {
        let obs = Observable::new(ComplexMatrix::diag(&[1.0, 2.0, 3.0])).unwrap();
        let c = |x: f64| Complex64::new(x, 0.0);
        let h = 0.5_f64.sqrt();
        // α has no weight on level 1 while ψ does: infinite ratio wins
        let pair = HiddenPair::new(vec![c(h), c(h), c(0.0)], vec![c(1.0), c(0.0), c(0.0)], 1.0).unwrap();
        let s = polychotomic_select(&pair, &obs).unwrap();
        assert_eq!((s.index, s.eigenvalue), (1, 2.0));
        assert!(s.ratios[1].is_infinite() && s.ratios[2].is_nan());
        // equal ratios: lowest index, flagged
        let pair = HiddenPair::new(vec![c(h), c(h), c(0.0)], vec![c(h), c(h), c(0.0)], 1.0).unwrap();
        let s = polychotomic_select(&pair, &obs).unwrap();
        assert_eq!(s.index, 0);
        assert!(s.tie);
    }

    #[test]
    fn validation() {
        let c = |x: f64| Complex64::new(x, 0.0);
        assert_eq!(HiddenPair::new(vec![c(1.0)], vec![c(1.0)], 1.0).unwrap_err(), HiddenError::Dimension(1));
        assert!(matches!(HiddenPair::new(vec![c(1.0), c(1.0)], vec![c(1.0), c(0.0)], 1.0), Err(HiddenError::Norm { .. })));
        assert!(Observable::new(ComplexMatrix::from_rows(2, vec![c(0.0), c(1.0), c(2.0), c(0.0)]).unwrap()).is_err());
        let obs = Observable::new(ComplexMatrix::diag(&[1.0, 2.0])).unwrap();
        assert!(born_estimate(&[c(1.0), c(0.0)], &obs, &[c(1.0), c(0.0)], 999, RngStream::new(0, 0), HaarMethod::GramSchmidt).is_err());
    }

    #[test]
    fn signal_noise() {
        let psi = random_state(RngStream::new(15, 0), 4);
        let alpha = random_state(RngStream::new(16, 0), 4);
        let same = signal_noise_state(&psi, &alpha, 0.0).unwrap();
        assert!(same.iter().zip(&psi).all(|(a, b)| (a - b).norm() < 1e-15));
        for lambda in [-2.0, 0.3, 5.0] {
            assert!((norm(&signal_noise_state(&psi, &alpha, lambda).unwrap()) - 1.0).abs() < 1e-14);
        }
        let obs = Observable::random(RngStream::new(17, 0), 4).unwrap();
        let p = obs.probabilities(&psi);
        let q = obs.probabilities(&signal_noise_state(&psi, &alpha, 1e-3).unwrap());
        // first order: |Δp_k| ≤ 2λ|⟨φ_k|ψ⟩||⟨φ_k|α⟩| + 2λ p_k |Re⟨ψ|α⟩| + O(λ²)
        assert!(p.iter().zip(&q).all(|(a, b)| (a - b).abs() < 5e-3));
        assert!(p.iter().zip(&q).any(|(a, b)| (a - b).abs() > 1e-6));
        let neg: Vec<Complex64> = psi.iter().map(|z| -z).collect();
        assert_eq!(signal_noise_state(&psi, &neg, 1.0).unwrap_err(), HiddenError::Cancellation);
    }
}
