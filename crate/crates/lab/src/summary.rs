use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::LabError;

/// How a check's value is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

impl Relation {
    pub fn holds(self, value: f64, tolerance: f64) -> bool {
        match self {
            Relation::AtMost => value <= tolerance,
            Relation::AtLeast => value >= tolerance,
            Relation::Above => value > tolerance,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Above => ">",
        }
    }
}

// non-finite numbers are written as null and read back as NaN
fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

fn de_f64<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

fn ser_map<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
    let o: BTreeMap<&String, Option<f64>> = m.iter().map(|(k, v)| (k, v.is_finite().then_some(*v))).collect();
    o.serialize(s)
}

fn de_map<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
    let o = BTreeMap::<String, Option<f64>>::deserialize(d)?;
    Ok(o.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::NAN))).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub relation: Relation,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub value: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, tolerance: f64) -> Self {
        Self { name: name.into(), relation, value, tolerance, passed: relation.holds(value, tolerance) }
    }

    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Relation::AtMost, tolerance)
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Relation::AtLeast, threshold)
    }

    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Relation::Above, threshold)
    }

    /// A yes/no condition recorded as value 1 or 0 against threshold 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub experiment: String,
    pub seed: u64,
    pub wall_time_s: f64,
    #[serde(serialize_with = "ser_map", deserialize_with = "de_map")]
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub born: Option<Value>,
}

pub const SUMMARY_FILE: &str = "summary.json";

impl RunSummary {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Writes `summary.json` through a temporary file and a rename.
    pub fn write_atomic(&self, dir: &Path) -> Result<(), LabError> {
        let path = dir.join(SUMMARY_FILE);
        let tmp = dir.join(format!(".{SUMMARY_FILE}.tmp"));
        let mut f = std::fs::File::create(&tmp).map_err(|e| LabError::io(&tmp, e))?;
        f.write_all(self.to_json().as_bytes()).and_then(|_| f.sync_all()).map_err(|e| LabError::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| LabError::io(&path, e))
    }

    pub fn read(dir: &Path) -> Result<Self, String> {
        let path = dir.join(SUMMARY_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// The summary with `wall_time_s` zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self { wall_time_s: 0.0, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_non_finite_values() {
        let mut metrics = BTreeMap::new();
        metrics.insert("a".to_string(), 1.25);
        metrics.insert("b".to_string(), f64::INFINITY);
        let s = RunSummary {
            experiment: "x".into(),
            seed: 7,
            wall_time_s: 0.5,
            metrics,
            checks: vec![Check::at_most("c", f64::NAN, 1.0), Check::above("p", 0.5, 0.01), Check::holds("h", true)],
            born: None,
        };
        assert!(!s.checks[0].passed && s.checks[1].passed && s.checks[2].passed);
        let back: RunSummary = serde_json::from_str(&s.to_json()).unwrap();
        assert!(back.metrics["b"].is_nan() && back.checks[0].value.is_nan());
        assert_eq!(back.metrics["a"], 1.25);
        assert!(!back.all_passed());
        let dir = tempfile::tempdir().unwrap();
        s.write_atomic(dir.path()).unwrap();
        assert_eq!(RunSummary::read(dir.path()).unwrap().checks.len(), 3);
        assert!(!dir.path().join(".summary.json.tmp").exists());
    }
}
