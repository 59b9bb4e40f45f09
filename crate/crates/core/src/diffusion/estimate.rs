use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{DiffusionEnsemble, DiffusionError, DriftField};
use crate::numkit::stats::MeanEstimate;
use crate::numkit::UniformGrid;

/// Bins holding fewer samples than this are flagged and left out of fields and norms.
pub const MIN_BIN_COUNT: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct BinStat {
    pub center: f64,
    pub count: usize,
    pub populated: bool,
    /// Mean of `(x(t+dt) - x(t)) / dt` over paths in the bin at `t`.
    pub forward: MeanEstimate,
    /// Mean of `(x(t) - x(t-dt)) / dt` over the same paths.
    pub backward: MeanEstimate,
    /// Histogram density `count / (N * width)`.
    pub density: f64,
}

/// Binned forward/backward drift estimate at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftEstimate {
    pub step: usize,
    pub t: f64,
    pub lo: f64,
    pub width: f64,
    pub bins: Vec<BinStat>,
}

impl DriftEstimate {
    pub fn centers(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.center).collect()
    }

    pub fn empty_bins(&self) -> Vec<usize> {
        self.bins.iter().enumerate().filter(|(_, b)| !b.populated).map(|(i, _)| i).collect()
    }

    fn field(&self, pick: impl Fn(&BinStat) -> f64) -> DriftField {
        let grid = UniformGrid::new(self.lo + 0.5 * self.width, self.width, self.bins.len()).expect("bins have positive width");
        let values = self.bins.iter().map(|b| if b.populated { pick(b) } else { 0.0 }).collect();
        let mask = self.bins.iter().map(|b| b.populated).collect();
        DriftField::from_slices(grid, vec![self.t], vec![values])
            .and_then(|f| f.with_mask(vec![mask]))
            .expect("bin means are finite")
    }

    /// Forward drift `b` on the bin centres, unpopulated bins masked.
    pub fn forward_field(&self) -> DriftField {
        self.field(|b| b.forward.mean)
    }

    /// Backward drift `b_*` on the bin centres, unpopulated bins masked.
    pub fn backward_field(&self) -> DriftField {
        self.field(|b| b.backward.mean)
    }

    /// Central-difference `d/dx ln rho` between populated neighbours; `None` elsewhere.
    pub fn log_density_gradient(&self) -> Vec<Option<f64>> {
        let n = self.bins.len();
        (0..n)
            .map(|i| {
                if i == 0 || i + 1 == n {
                    return None;
                }
                let (a, b) = (&self.bins[i - 1], &self.bins[i + 1]);
                (a.populated && b.populated && self.bins[i].populated).then(|| (b.density.ln() - a.density.ln()) / (2.0 * self.width))
            })
            .collect()
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos as usize;
    let f = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - f) + sorted[i + 1] * f
    } else {
        sorted[i]
    }
}

/// Conditional forward and backward difference quotients at `step`, binned by
/// `x(t)` over equal-width bins spanning the central 99% of the sample.
pub fn estimate_drifts(ens: &DiffusionEnsemble, step: usize, n_bins: usize) -> Result<DriftEstimate, DiffusionError> {
    if step == 0 || step >= ens.steps {
        return Err(DiffusionError::InvalidParameter("drift estimation needs 0 < step < steps"));
    }
    if n_bins == 0 {
        return Err(DiffusionError::InvalidParameter("n_bins must be positive"));
    }
    let prev = ens.column(step - 1)?;
    let here = ens.column(step)?;
    let next = ens.column(step + 1)?;
    let mut sorted = here.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    let lo = quantile(&sorted, 0.005);
    let hi = quantile(&sorted, 0.995);
    if !(hi > lo) {
        return Err(DiffusionError::AllBinsEmpty);
    }
    let width = (hi - lo) / n_bins as f64;
    let mut fwd: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    let mut bwd: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    for p in 0..here.len() {
        let x = here[p];
        if x < lo || x > hi {
            continue;
        }
        let k = (((x - lo) / width) as usize).min(n_bins - 1);
        fwd[k].push((next[p] - x) / ens.dt);
        bwd[k].push((x - prev[p]) / ens.dt);
    }
    let total = here.len() as f64;
    let bins: Vec<BinStat> = (0..n_bins)
        .map(|k| {
            let count = fwd[k].len();
            BinStat {
                center: lo + (k as f64 + 0.5) * width,
                count,
                populated: count >= MIN_BIN_COUNT,
                forward: MeanEstimate::from_samples(fwd[k].iter().copied()),
                backward: MeanEstimate::from_samples(bwd[k].iter().copied()),
                density: count as f64 / (total * width),
            }
        })
        .collect();
    if bins.iter().all(|b| !b.populated) {
        return Err(DiffusionError::AllBinsEmpty);
    }
    Ok(DriftEstimate { step, t: ens.time(step), lo, width, bins })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceStats {
    /// Sample covariance of `x(t1)` and `x(t2)`.
    pub cov: MeanEstimate,
    /// `E[(x(t1+dt) - x(t1))/dt * x(t2)]`, centred; needs `t1 < t2`.
    pub ordered_product_left: Option<MeanEstimate>,
    /// `E[x(t1) * (x(t2+dt) - x(t2))/dt]`, centred; needs `t1 < t2` and `t2 + dt` recorded.
    pub ordered_product_right: Option<MeanEstimate>,
}

fn centred_products(a: &[f64], b: &[f64]) -> MeanEstimate {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut est = MeanEstimate::from_samples(a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)));
    if a.len() > 1 {
        // unbiased covariance
        est.mean *= n / (n - 1.0);
    }
    est
}

pub fn covariance_stats(ens: &DiffusionEnsemble, step1: usize, step2: usize) -> Result<CovarianceStats, DiffusionError> {
    let x1 = ens.column(step1)?;
    let x2 = ens.column(step2)?;
    let cov = centred_products(&x1, &x2);
    let quotient = |s: usize, xs: &[f64]| -> Option<Vec<f64>> {
        let nx = ens.column(s + 1).ok()?;
        Some(nx.iter().zip(xs).map(|(b, a)| (b - a) / ens.dt).collect())
    };
    let (left, right) = if step1 < step2 {
        let left = quotient(step1, &x1).map(|d| centred_products(&d, &x2));
        let right = quotient(step2, &x2).map(|d| centred_products(&x1, &d));
        (left, right)
    } else {
        (None, None)
    };
    Ok(CovarianceStats { cov, ordered_product_left: left, ordered_product_right: right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{simulate_ensemble, AnalyticDrift, Drift, FixedStart, GaussianStart, Record, SimulationConfig};
    use crate::numkit::RngStream;

    fn wiener(n: usize, steps: usize, record: Record, seed: u64) -> DiffusionEnsemble {
        let cfg = SimulationConfig::new(0.5, 0.01, steps, n).recording(record);
        simulate_ensemble(&AnalyticDrift(|_: f64, _: f64| 0.0), &FixedStart(0.0), &cfg, RngStream::new(seed, 0)).unwrap()
    }

    #[test]
    fn wiener_covariance_and_ordered_products() {
        let nu = 0.5;
        let e = wiener(40_000, 81, Record::Steps(vec![30, 31, 80, 81]), 11);
        let s = covariance_stats(&e, 30, 80).unwrap();
        assert!(s.cov.within_sigmas(2.0 * nu * 0.3, 3.0), "{:?}", s.cov);
        let l = s.ordered_product_left.unwrap();
        let r = s.ordered_product_right.unwrap();
        assert!(l.within_sigmas(2.0 * nu, 3.0), "{l:?}");
        assert!(r.within_sigmas(0.0, 3.0), "{r:?}");
        let same = covariance_stats(&e, 80, 80).unwrap();
        assert!(same.cov.within_sigmas(2.0 * nu * 0.8, 3.0));
        assert!(same.ordered_product_left.is_none());
    }

    #[test]
    fn unrecorded_step_rejected() {
        let e = wiener(10, 10, Record::Steps(vec![2, 5]), 1);
        assert_eq!(covariance_stats(&e, 2, 4).unwrap_err(), DiffusionError::StepNotRecorded(4));
        assert!(covariance_stats(&e, 2, 5).unwrap().ordered_product_left.is_none());
    }

    #[test]
    fn wiener_forward_zero_backward_x_over_t() {
        let e = wiener(100_000, 51, Record::Steps(vec![49, 50, 51]), 12);
        let est = estimate_drifts(&e, 50, 12).unwrap();
        let t = e.time(50);
        for b in est.bins.iter().filter(|b| b.populated) {
            assert!(b.forward.within_sigmas(0.0, 3.5), "{b:?}");
            // backward drift x/t, evaluated at the bin's mean position
            assert!((b.backward.mean - b.center / t).abs() < 3.5 * b.backward.stderr + 0.5 * est.width / t, "{b:?}");
        }
    }

    #[test]
    fn stationary_ou_backward_drift_and_osmotic_relation() {
        let nu = 0.5;
        let cfg = SimulationConfig::new(nu, 0.01, 3, 200_000);
        let e = simulate_ensemble(&AnalyticDrift(|x: f64, _: f64| -x), &GaussianStart { mean: 0.0, sd: nu.sqrt() }, &cfg, RngStream::new(13, 0)).unwrap();
        let est = estimate_drifts(&e, 1, 10).unwrap();
        let populated: Vec<_> = est.bins.iter().filter(|b| b.populated).collect();
        assert!(populated.len() >= 8);
        for b in &populated {
            assert!((b.forward.mean + b.center).abs() < 4.0 * b.forward.stderr + 0.05, "{b:?}");
            assert!((b.backward.mean - b.center).abs() < 4.0 * b.backward.stderr + 0.05, "{b:?}");
        }
        // b - b_* = 2 nu d ln rho
        let grad = est.log_density_gradient();
        for (i, g) in grad.iter().enumerate() {
            if let Some(g) = g {
                let b = &est.bins[i];
                let diff = b.forward.mean - b.backward.mean;
                let err = 4.0 * (b.forward.stderr + b.backward.stderr) + 0.3;
                assert!((diff - 2.0 * nu * g).abs() < err, "bin {i}: {diff} vs {}", 2.0 * nu * g);
            }
        }
        let f = est.forward_field();
        assert!(f.eval(0.0, 0.0).unpopulated.is_none());
    }

    #[test]
    fn reversed_ensemble_swaps_drifts() {
        let nu = 0.5;
        let cfg = SimulationConfig::new(nu, 0.01, 3, 100_000);
        let e = simulate_ensemble(&AnalyticDrift(|x: f64, _: f64| -x), &GaussianStart { mean: 0.0, sd: nu.sqrt() }, &cfg, RngStream::new(14, 0)).unwrap();
        let r = e.reversed();
        let a = estimate_drifts(&e, 1, 8).unwrap();
        let b = estimate_drifts(&r, 2, 8).unwrap();
        // same sample at the same physical time; forward of the reverse is minus backward of the original
        assert_eq!(a.lo, b.lo);
        for (x, y) in a.bins.iter().zip(&b.bins) {
            assert!((x.backward.mean + y.forward.mean).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_steps() {
        let e = wiener(40, 4, Record::All, 1);
        assert!(estimate_drifts(&e, 0, 4).is_err());
        assert!(estimate_drifts(&e, 4, 4).is_err());
        assert_eq!(estimate_drifts(&e, 2, 40).unwrap_err(), DiffusionError::AllBinsEmpty);
    }
}
