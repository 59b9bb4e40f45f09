//! Registered experiments, one per acceptance criterion.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::Value;
use stochtrace_core::RngStream;

use crate::config::{ExperimentConfig, ParamSpec, Params};
use crate::output::{write_csv, Cell};
use crate::summary::{Check, RunSummary};
use crate::LabError;

mod determinism;
pub use determinism::csv_files;
mod diffusion;
mod emergent;
mod hidden;
mod trace;
mod wave;

/// Inputs handed to an experiment body.
pub struct Ctx<'a> {
    pub seed: u64,
    pub params: &'a Params,
    pub out_dir: &'a Path,
}

impl Ctx<'_> {
    /// Independent stream `id` under the run seed.
    pub fn stream(&self, id: u64) -> RngStream {
        RngStream::new(self.seed, id)
    }

    pub fn csv<I: IntoIterator<Item = Vec<Cell>>>(&self, name: &str, header: &[&str], rows: I) -> Result<(), LabError> {
        write_csv(&self.out_dir.join(name), header, rows)
    }
}

/// Metrics and checks produced by an experiment body.
#[derive(Debug, Default)]
pub struct Outcome {
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub born: Option<Value>,
}

impl Outcome {
    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn check(&mut self, check: Check) {
        debug_assert!(self.checks.iter().all(|c| c.name != check.name), "duplicate check {}", check.name);
        self.checks.push(check);
    }
}

pub struct Experiment {
    pub name: &'static str,
    /// Acceptance criterion covered by this experiment.
    pub criterion: u8,
    pub about: &'static str,
    pub params: &'static [ParamSpec],
    /// Parameter overrides for a smoke-sized run.
    pub quick: &'static [(&'static str, QuickValue)],
    pub run: fn(&Ctx) -> Result<Outcome, LabError>,
}

#[derive(Debug, Clone, Copy)]
pub enum QuickValue {
    Int(u64),
    Str(&'static str),
}

impl Experiment {
    pub fn quick_config(&self, seed: u64) -> ExperimentConfig {
        self.quick.iter().fold(ExperimentConfig::new(self.name, seed), |c, (k, v)| match v {
            QuickValue::Int(n) => c.with(k, *n),
            QuickValue::Str(s) => c.with(k, *s),
        })
    }
}

pub fn registry() -> &'static [Experiment] {
    static REGISTRY: &[Experiment] = &[
        diffusion::WIENER_STRUCTURE,
        diffusion::DIVERGENCE_SPLIT,
        diffusion::DENSITY_MATCHING,
        wave::HJ_SIGN_FLIP,
        wave::MARKOV_WAVE,
        wave::SCALED_EQUIVALENCE,
        emergent::EMERGENT_COMMUTATOR,
        emergent::HAMILTONIAN_CHAIN,
        emergent::HEISENBERG_FLOW,
        emergent::TIME_ORDERED_MOMENTS,
        trace::TRACE_CONSERVATION,
        trace::TRACE_DERIVATIVE,
        hidden::BORN_RULE,
        hidden::UR_INVARIANCE,
        determinism::DETERMINISM,
    ];
    REGISTRY
}

pub fn find(name: &str) -> Result<&'static Experiment, LabError> {
    registry().iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = registry().iter().map(|e| e.name).collect();
        LabError::config(format!("unknown experiment `{name}` (known: {})", names.join(", ")))
    })
}

/// Runs `config`, writing its CSV files and `summary.json` into the output directory.
/// `out` and `seed` override the config when given.
pub fn run_experiment(config: &ExperimentConfig, out: Option<&Path>, seed: Option<u64>) -> Result<RunSummary, LabError> {
    let exp = find(&config.experiment)?;
    let params = Params::resolve(exp.params, &config.params)?;
    let out_dir: PathBuf = out
        .map(Path::to_path_buf)
        .or_else(|| config.out_dir.clone())
        .ok_or_else(|| LabError::config("no output directory: set `out_dir` or pass --out"))?;
    std::fs::create_dir_all(&out_dir).map_err(|e| LabError::config(format!("output directory {}: {e}", out_dir.display())))?;
    let seed = seed.unwrap_or(config.seed);
    let ctx = Ctx { seed, params: &params, out_dir: &out_dir };
    let start = Instant::now();
    let outcome = (exp.run)(&ctx)?;
    let summary = RunSummary {
        experiment: exp.name.to_string(),
        seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        metrics: outcome.metrics,
        checks: outcome.checks,
        born: outcome.born,
    };
    summary.write_atomic(&out_dir)?;
    Ok(summary)
}

/// `max |z|` of pairwise differences between independent estimates.
pub(crate) fn max_pairwise_z(estimates: &[stochtrace_core::numkit::stats::MeanEstimate]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, a) in estimates.iter().enumerate() {
        for b in &estimates[i + 1..] {
            let z = (a.mean - b.mean) / (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            worst = worst.max(z.abs());
        }
    }
    worst
}
