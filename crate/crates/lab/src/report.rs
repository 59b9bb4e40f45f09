//! Consolidated table of checks across run directories.

use std::io::Write;
use std::path::Path;

use crate::output::format_float;
use crate::summary::RunSummary;

pub const HEADER: [&str; 8] = ["dir", "experiment", "seed", "check", "relation", "value", "tolerance", "status"];

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format_float(x)
    }
}

/// Writes one row per check per run. A directory whose summary cannot be read gets a
/// single row with status `malformed`. Returns whether every summary was readable.
pub fn report<W: Write>(dirs: &[&Path], out: W) -> csv::Result<bool> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(HEADER)?;
    let mut ok = true;
    for dir in dirs {
        let d = dir.display().to_string();
        match RunSummary::read(dir) {
            Ok(s) => {
                for c in &s.checks {
                    let status = if c.passed { "pass" } else { "fail" };
                    w.write_record([d.as_str(), &s.experiment, &s.seed.to_string(), &c.name, c.relation.symbol(), &num(c.value), &num(c.tolerance), status])?;
                }
            }
            Err(e) => {
                ok = false;
                w.write_record([d.as_str(), "", "", "", "", "", "", &format!("malformed: {e}")])?;
            }
        }
    }
    w.flush()?;
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summary::Check;

    #[test]
    fn rows_and_flags() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        std::fs::create_dir_all(&a).unwrap();
        std::fs::create_dir_all(&b).unwrap();
        let s = RunSummary {
            experiment: "x".into(),
            seed: 9,
            wall_time_s: 0.1,
            metrics: Default::default(),
            checks: vec![Check::at_most("c1", 0.5, 1.0), Check::above("c2", 0.001, 0.01)],
            born: None,
        };
        s.write_atomic(&a).unwrap();
        std::fs::write(b.join("summary.json"), "{ not json").unwrap();
        let mut buf = Vec::new();
        assert!(!report(&[a.as_path(), b.as_path()], &mut buf).unwrap());
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].contains(",x,9,c1,<=,") && lines[1].ends_with(",pass"));
        assert!(lines[2].ends_with(",fail"));
        assert!(lines[3].contains("malformed"));
        let mut buf = Vec::new();
        assert!(report(&[], &mut buf).unwrap());
        assert_eq!(String::from_utf8(buf).unwrap(), HEADER.join(",") + "\n");
    }
}
