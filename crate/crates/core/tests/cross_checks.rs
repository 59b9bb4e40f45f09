//! Cross-module checks: diffusion ensembles against wave-mechanical densities and
//! operator-valued moments.

use stochtrace_core::diffusion::{simulate_ensemble, AnalyticDrift, DriftField, FixedStart, GridDensitySampler, Record, SimulationConfig};
use stochtrace_core::emergent::{build_basis, hamiltonian_operator, heisenberg_flow, operator_matrices, time_ordered_moment, BasisKind};
use stochtrace_core::numkit::stats::MeanEstimate;
use stochtrace_core::waveengine::{fields_from_wavefunction, histogram_vs_density, HydroFields, WavefunctionGrid};
use stochtrace_core::{Complex64, RngStream, UniformGrid};

fn ground_state(hbar: f64) -> WavefunctionGrid {
    let g = UniformGrid::spanning(-8.0, 8.0, 801).unwrap();
    WavefunctionGrid::from_fn(g, hbar, |x| Complex64::new((-x * x / (2.0 * hbar)).exp(), 0.0)).unwrap()
}

#[test]
fn ground_state_density_is_reproduced_for_any_nu() {
    let hbar = 1.0;
    let w = ground_state(hbar);
    for (i, nu) in [0.25, 1.0].into_iter().enumerate() {
        let f = fields_from_wavefunction(&w, nu).unwrap();
        let drift = DriftField::stationary(f.grid, f.b.clone()).unwrap();
        let cfg = SimulationConfig::new(nu, 1e-3, 500, 20_000).recording(Record::Steps(vec![500]));
        let ens = simulate_ensemble(&drift, &GridDensitySampler::new(f.grid, &f.rho).unwrap(), &cfg, RngStream::new(40, i as u64)).unwrap();
        let chi = histogram_vs_density(&ens.column(500).unwrap(), &f.grid, &f.rho, 30);
        assert!(chi.p_value > 0.01, "nu = {nu}: {chi:?}");
        assert_eq!(ens.boundary_hit_rate(), 0.0);
    }
}

#[test]
fn wrong_drift_is_detected() {
    // the same density with the drift of a different ν does not stay stationary
    let w = ground_state(1.0);
    let f = fields_from_wavefunction(&w, 0.5).unwrap();
    let drift = DriftField::stationary(f.grid, f.b.clone()).unwrap();
    let cfg = SimulationConfig::new(1.0, 1e-3, 500, 20_000).recording(Record::Steps(vec![500]));
    let ens = simulate_ensemble(&drift, &GridDensitySampler::new(f.grid, &f.rho).unwrap(), &cfg, RngStream::new(41, 0)).unwrap();
    let chi = histogram_vs_density(&ens.column(500).unwrap(), &f.grid, &f.rho, 30);
    assert!(chi.p_value < 1e-6, "{chi:?}");
}

#[test]
fn time_ordered_moments_match_wiener_paths() {
    let (nu, t0): (f64, f64) = (0.5, 1.0);
    let s = (2.0 * nu * t0).sqrt();
    let g = UniformGrid::spanning(-14.0 * s, 14.0 * s, 2801).unwrap();
    let xs = g.points();
    let ln: Vec<f64> = xs.iter().map(|x| -x * x / (4.0 * nu * t0)).collect();
    let v: Vec<f64> = xs.iter().map(|x| x / (2.0 * t0)).collect();
    let f = HydroFields::from_log_density(g, t0, nu, 1.0, &ln, &v).unwrap();
    let basis = build_basis(g, &f.rho, 20, BasisKind::HermiteAnalytic).unwrap();
    let ops = operator_matrices(&basis, &f).unwrap();
    let (x, vh) = (ops.x_hat.matrix, ops.v_hat.matrix);
    let h = hamiltonian_operator(&x, &vh, &[], None);
    let flow = heisenberg_flow(&x, &vh, &h, nu, t0, 0.1, 10).unwrap();

    // Euler-Maruyama is exact for b = 0, so a coarse step suffices
    let cfg = SimulationConfig::new(nu, 0.1, 20, 1_000_000).recording(Record::Steps(vec![12, 15, 17]));
    let ens = simulate_ensemble(&AnalyticDrift(|_: f64, _: f64| 0.0), &FixedStart(0.0), &cfg, RngStream::new(42, 0)).unwrap();
    let (a, b, c) = (ens.column(12).unwrap(), ens.column(15).unwrap(), ens.column(17).unwrap());

    let op2 = time_ordered_moment(&flow, &[1.2, 1.7]).unwrap();
    assert!((op2 - 2.0 * nu * 1.2).abs() < 1e-8);
    let mc2 = MeanEstimate::from_samples(a.iter().zip(&c).map(|(p, q)| p * q));
    assert!(mc2.within_sigmas(op2, 3.0), "{mc2:?} vs {op2}");

    let op3 = time_ordered_moment(&flow, &[1.2, 1.5, 1.7]).unwrap();
    let mc3 = MeanEstimate::from_samples((0..a.len()).map(|i| a[i] * b[i] * c[i]));
    assert!(mc3.within_sigmas(op3, 3.0), "{mc3:?} vs {op3}");

    let op1 = time_ordered_moment(&flow, &[1.5]).unwrap();
    assert!(MeanEstimate::from_samples(b.iter().copied()).within_sigmas(op1, 3.0));
}
