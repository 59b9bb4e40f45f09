use std::path::Path;

use super::{find, registry, run_experiment, Ctx, Experiment, Outcome};
use crate::config::{boolean, text, ExperimentConfig, ParamSpec};
use crate::summary::Check;
use crate::LabError;

const PARAMS: &[ParamSpec] = &[
    text("targets", "all", "comma-separated experiment names, or \"all\""),
    boolean("quick", true, "run targets at smoke size instead of their defaults"),
];

pub const DETERMINISM: Experiment = Experiment {
    name: "determinism",
    criterion: 15,
    about: "every experiment run twice with one seed writes byte-identical files",
    params: PARAMS,
    quick: &[],
    run: determinism,
};

/// Sorted `(file name, bytes)` of the CSV files in `dir`.
pub fn csv_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, LabError> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| LabError::io(dir, e))? {
        let path = entry.map_err(|e| LabError::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "csv") {
            let bytes = std::fs::read(&path).map_err(|e| LabError::io(&path, e))?;
            out.push((path.file_name().unwrap().to_string_lossy().into_owned(), bytes));
        }
    }
    out.sort();
    Ok(out)
}

fn determinism(ctx: &Ctx) -> Result<Outcome, LabError> {
    let p = ctx.params;
    let targets: Vec<&'static Experiment> = match p.str("targets") {
        "all" => registry().iter().filter(|e| e.name != DETERMINISM.name).collect(),
        list => list.split(',').map(|t| find(t.trim())).collect::<Result<_, _>>()?,
    };
    if targets.iter().any(|e| e.name == DETERMINISM.name) {
        return Err(LabError::config("determinism cannot target itself"));
    }
    let mut out = Outcome::default();
    let mut files = 0usize;
    for exp in targets {
        let cfg = if p.bool("quick") { exp.quick_config(ctx.seed) } else { ExperimentConfig::new(exp.name, ctx.seed) };
        let dirs = [ctx.out_dir.join("first").join(exp.name), ctx.out_dir.join("second").join(exp.name)];
        let a = run_experiment(&cfg, Some(&dirs[0]), None)?;
        let b = run_experiment(&cfg, Some(&dirs[1]), None)?;
        let (fa, fb) = (csv_files(&dirs[0])?, csv_files(&dirs[1])?);
        files += fa.len();
        out.metric(format!("{}_csv_files", exp.name), fa.len() as f64);
        out.check(Check::holds(format!("{}_identical", exp.name), fa == fb && a.without_timing() == b.without_timing()));
    }
    out.metric("csv_files", files as f64);
    Ok(out)
}
