use alloc::vec::Vec;

use super::calculus::antiderivative;
use crate::numkit::stats::{chi_square_gof, ChiSquare};
use crate::numkit::UniformGrid;

/// Interior edges of `n_bins` equal-probability bins of a tabulated density
/// (outer bins extend to ±∞).
pub fn density_bin_edges(grid: &UniformGrid, density: &[f64], n_bins: usize) -> Vec<f64> {
    let cdf = antiderivative(density, grid.dx);
    let total = *cdf.last().unwrap_or(&0.0);
    (1..n_bins)
        .map(|k| {
            let target = total * k as f64 / n_bins as f64;
            let i = cdf.partition_point(|&c| c < target).clamp(1, cdf.len() - 1);
            let (lo, hi) = (cdf[i - 1], cdf[i]);
            let frac = if hi > lo { (target - lo) / (hi - lo) } else { 0.0 };
            grid.x(i - 1) + frac * grid.dx
        })
        .collect()
}

/// Pearson chi-square of sample positions against a tabulated density using
/// `n_bins` equal-probability bins.
pub fn histogram_vs_density(samples: &[f64], grid: &UniformGrid, density: &[f64], n_bins: usize) -> ChiSquare {
    let edges = density_bin_edges(grid, density, n_bins);
    let mut counts = alloc::vec![0u64; n_bins];
    for x in samples {
        counts[edges.partition_point(|e| e <= x)] += 1;
    }
    let probs = alloc::vec![1.0 / n_bins as f64; n_bins];
    chi_square_gof(&counts, &probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::RngStream;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn gaussian_samples_match() {
        let g = UniformGrid::spanning(-8.0, 8.0, 1601).unwrap();
        let d: Vec<f64> = g.points().iter().map(|x| (-x * x).exp()).collect();
        let edges = density_bin_edges(&g, &d, 2);
        assert!(edges[0].abs() < 1e-9);
        let mut rng = RngStream::new(7, 0).rng();
        let n = Normal::new(0.0, 0.5f64.sqrt()).unwrap();
        let xs: Vec<f64> = (0..50_000).map(|_| n.sample(&mut rng)).collect();
        assert!(histogram_vs_density(&xs, &g, &d, 40).p_value > 0.01);
        // wrong width is detected
        let wide: Vec<f64> = xs.iter().map(|x| 1.05 * x).collect();
        assert!(histogram_vs_density(&wide, &g, &d, 40).p_value < 1e-6);
    }
}
