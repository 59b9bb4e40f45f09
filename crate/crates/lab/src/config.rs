use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::LabError;

/// One run request. Unknown top-level keys are rejected; `params` keys are checked
/// against the experiment's declared parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: &str, seed: u64) -> Self {
        Self { experiment: experiment.into(), seed, params: BTreeMap::new(), out_dir: None }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }

    pub fn from_json(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| LabError::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            LabError::Config(m) => LabError::config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamDefault {
    Int(u64),
    Float(f64),
    Bool(bool),
    Str(&'static str),
}

/// A declared experiment parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub key: &'static str,
    pub default: ParamDefault,
    pub help: &'static str,
}

pub const fn int(key: &'static str, default: u64, help: &'static str) -> ParamSpec {
    ParamSpec { key, default: ParamDefault::Int(default), help }
}

pub const fn float(key: &'static str, default: f64, help: &'static str) -> ParamSpec {
    ParamSpec { key, default: ParamDefault::Float(default), help }
}

pub const fn boolean(key: &'static str, default: bool, help: &'static str) -> ParamSpec {
    ParamSpec { key, default: ParamDefault::Bool(default), help }
}

pub const fn text(key: &'static str, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec { key, default: ParamDefault::Str(default), help }
}

/// Parameters resolved against their declarations, defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    values: BTreeMap<&'static str, ParamDefault>,
    owned: BTreeMap<&'static str, String>,
}

impl Params {
    pub fn resolve(specs: &[ParamSpec], given: &BTreeMap<String, Value>) -> Result<Self, LabError> {
        if let Some(k) = given.keys().find(|k| !specs.iter().any(|s| s.key == k.as_str())) {
            let known: Vec<&str> = specs.iter().map(|s| s.key).collect();
            return Err(LabError::config(format!("unknown parameter `{k}` (known: {})", known.join(", "))));
        }
        let mut values = BTreeMap::new();
        let mut owned = BTreeMap::new();
        for s in specs {
            let v = match (given.get(s.key), s.default) {
                (None, d) => d,
                (Some(v), ParamDefault::Int(_)) => ParamDefault::Int(as_count(v).ok_or_else(|| bad(s.key, "a non-negative integer", v))?),
                (Some(v), ParamDefault::Float(_)) => ParamDefault::Float(v.as_f64().ok_or_else(|| bad(s.key, "a number", v))?),
                (Some(v), ParamDefault::Bool(_)) => ParamDefault::Bool(v.as_bool().ok_or_else(|| bad(s.key, "a boolean", v))?),
                (Some(v), ParamDefault::Str(_)) => {
                    owned.insert(s.key, v.as_str().ok_or_else(|| bad(s.key, "a string", v))?.to_string());
                    ParamDefault::Str("")
                }
            };
            values.insert(s.key, v);
        }
        Ok(Self { values, owned })
    }

    fn get(&self, key: &str) -> ParamDefault {
        *self.values.get(key).unwrap_or_else(|| panic!("undeclared parameter {key}"))
    }

    pub fn f64(&self, key: &str) -> f64 {
        match self.get(key) {
            ParamDefault::Float(x) => x,
            ParamDefault::Int(n) => n as f64,
            other => panic!("parameter {key} is {other:?}"),
        }
    }

    pub fn u64(&self, key: &str) -> u64 {
        match self.get(key) {
            ParamDefault::Int(n) => n,
            other => panic!("parameter {key} is {other:?}"),
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        self.u64(key) as usize
    }

    pub fn bool(&self, key: &str) -> bool {
        match self.get(key) {
            ParamDefault::Bool(b) => b,
            other => panic!("parameter {key} is {other:?}"),
        }
    }

    pub fn str(&self, key: &str) -> &str {
        match (self.get(key), self.owned.get(key)) {
            (_, Some(s)) => s,
            (ParamDefault::Str(s), None) => s,
            (other, _) => panic!("parameter {key} is {other:?}"),
        }
    }

    /// Comma-separated numbers.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, LabError> {
        self.str(key)
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| LabError::config(format!("parameter `{key}`: cannot parse {t:?} as a number"))))
            .collect()
    }

    /// Checks `lo <= value <= hi` for a numeric parameter.
    pub fn require_range(&self, key: &str, lo: f64, hi: f64) -> Result<(), LabError> {
        let v = self.f64(key);
        if !(v >= lo && v <= hi) {
            return Err(LabError::config(format!("parameter `{key}` = {v} outside [{lo}, {hi}]")));
        }
        Ok(())
    }
}

fn as_count(v: &Value) -> Option<u64> {
    v.as_u64().or_else(|| v.as_f64().filter(|x| *x >= 0.0 && x.fract() == 0.0 && *x < 2f64.powi(53)).map(|x| x as u64))
}

fn bad(key: &str, want: &str, got: &Value) -> LabError {
    LabError::config(format!("parameter `{key}` must be {want}, got {got}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPECS: &[ParamSpec] = &[int("n", 10, ""), float("dt", 0.1, ""), boolean("flag", false, ""), text("list", "1,2", "")];

    #[test]
    fn defaults_and_overrides() {
        let p = Params::resolve(SPECS, &BTreeMap::new()).unwrap();
        assert_eq!((p.usize("n"), p.f64("dt"), p.bool("flag"), p.str("list")), (10, 0.1, false, "1,2"));
        let cfg = ExperimentConfig::from_json(r#"{"experiment":"x","seed":3,"params":{"n":1e5,"dt":2,"list":"0.5, 1"}}"#).unwrap();
        let p = Params::resolve(SPECS, &cfg.params).unwrap();
        assert_eq!(p.usize("n"), 100_000);
        assert_eq!(p.f64("dt"), 2.0);
        assert_eq!(p.f64_list("list").unwrap(), vec![0.5, 1.0]);
    }

    #[test]
    fn rejects_unknown_and_mistyped() {
        assert!(ExperimentConfig::from_json(r#"{"experiment":"x"}"#).unwrap_err().to_string().contains("seed"));
        let e = ExperimentConfig::from_json("{\"experiment\":\"x\",\n\"seed\":1,\n\"sede\":2}").unwrap_err().to_string();
        assert!(e.contains("sede") && e.contains("line 3"), "{e}");
        let cfg = ExperimentConfig::new("x", 1).with("m", 1);
        assert!(Params::resolve(SPECS, &cfg.params).unwrap_err().to_string().contains("`m`"));
        for (k, v) in [("n", Value::from(-1)), ("n", Value::from(1.5)), ("dt", Value::from("a")), ("flag", Value::from(1)), ("list", Value::from(2))] {
            let cfg = ExperimentConfig::new("x", 1).with(k, v);
            assert!(matches!(Params::resolve(SPECS, &cfg.params), Err(LabError::Config(_))), "{k}");
        }
        let cfg = ExperimentConfig::new("x", 1).with("list", "1,z");
        assert!(Params::resolve(SPECS, &cfg.params).unwrap().f64_list("list").is_err());
    }
}
