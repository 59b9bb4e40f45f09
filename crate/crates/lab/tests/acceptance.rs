//! Acceptance gate: every criterion at its stated size and tolerance, one line each.
//! Criteria 1-14 run twice with the same seed; criterion 15 compares the two runs.

use std::path::Path;
use std::process::ExitCode;

use stochtrace::experiments::{csv_files, registry};
use stochtrace::{run_experiment, ExperimentConfig, RunSummary};

const SEED: u64 = 1;

/// Runtime budget in seconds for each criterion.
fn budget(name: &str, s: &RunSummary) -> f64 {
    match name {
        "wiener_structure" => 30.0,
        "divergence_split" => 60.0,
        // per diffusion constant
        "density_matching" => 60.0 * s.metrics.keys().filter(|k| k.ends_with("_boundary_hit_rate")).count() as f64,
        "hj_sign_flip" | "markov_wave" | "scaled_equivalence" | "heisenberg_flow" => 10.0,
        "emergent_commutator" | "hamiltonian_chain" => 5.0,
        "time_ordered_moments" | "born_rule" => 60.0,
        "trace_conservation" | "trace_derivative" => 30.0,
        "ur_invariance" => 120.0,
        other => panic!("no budget for {other}"),
    }
}

fn run(name: &str, dir: &Path) -> Result<RunSummary, String> {
    run_experiment(&ExperimentConfig::new(name, SEED), Some(dir), None).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let root = tempfile::tempdir().expect("temp dir");
    let mut all = true;
    let mut identical = Vec::new();
    for exp in registry().iter().filter(|e| e.name != "determinism") {
        let (a, b) = (root.path().join("a").join(exp.name), root.path().join("b").join(exp.name));
        let line = match (run(exp.name, &a), run(exp.name, &b)) {
            (Ok(s), Ok(t)) => {
                let limit = budget(exp.name, &s);
                let failed: Vec<&str> = s.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                let fast = s.wall_time_s < limit;
                let ok = failed.is_empty() && fast && !s.checks.is_empty();
                all &= ok;
                let same = csv_files(&a).ok().zip(csv_files(&b).ok()).is_some_and(|(x, y)| x == y) && s.without_timing() == t.without_timing();
                identical.push((exp.name, same));
                let detail = if failed.is_empty() { format!("{} checks", s.checks.len()) } else { format!("failed: {}", failed.join(", ")) };
                format!("{} criterion {:>2} {:<22} {detail}; {:.2} s (limit {limit} s)", if ok { "PASS" } else { "FAIL" }, exp.criterion, exp.name, s.wall_time_s)
            }
            (Err(e), _) | (_, Err(e)) => {
                all = false;
                identical.push((exp.name, false));
                format!("FAIL criterion {:>2} {:<22} error: {e}", exp.criterion, exp.name)
            }
        };
        println!("{line}");
    }
    let differing: Vec<&str> = identical.iter().filter(|(_, s)| !s).map(|(n, _)| *n).collect();
    let det = differing.is_empty();
    all &= det;
    let detail = if det { format!("{} experiments reproduced byte for byte", identical.len()) } else { format!("differing: {}", differing.join(", ")) };
    println!("{} criterion 15 {:<22} {detail}", if det { "PASS" } else { "FAIL" }, "determinism");
    if all {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: some criteria failed");
        ExitCode::FAILURE
    }
}
