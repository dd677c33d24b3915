//! Run configuration: command-line flags layered over an optional JSON file.

use std::path::{Path, PathBuf};

use onecls::eval::{Grid, Method, MethodSpec};
use onecls::{LabelColumn, Regularizer};
use serde::{Deserialize, Serialize};

/// Every field is optional so a file can set any subset of the flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub label_column: Option<String>,
    pub target: Option<String>,
    pub method: Option<String>,
    pub kernelized: Option<bool>,
    pub reg: Option<String>,
    /// Grid values replacing the defaults, e.g. `{"C": [0.1, 0.3], "d": [2]}`.
    pub grid: Option<serde_json::Map<String, serde_json::Value>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub repetitions: Option<usize>,
    pub folds: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))
    }
}

/// Applies `key=v1/v2/...` assignments separated by commas.
pub fn apply_grid_overrides(grid: &mut Grid, spec: &str) -> Result<(), String> {
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| format!("grid entry {part:?} is not key=values"))?;
        let floats = || -> Result<Vec<f64>, String> {
            values
                .split('/')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| format!("invalid number {v:?} for {key}"))
                })
                .collect()
        };
        match key.trim() {
            "C" | "c" => grid.c = floats()?,
            "beta" => grid.beta = floats()?,
            "eta" => grid.eta = floats()?,
            "sigma" => grid.sigma = floats()?,
            "d" => {
                grid.d = values
                    .split('/')
                    .map(|v| {
                        v.trim()
                            .parse::<usize>()
                            .map_err(|_| format!("invalid dimension {v:?}"))
                    })
                    .collect::<Result<_, _>>()?
            }
            "k_max" => {
                grid.k_max = values
                    .trim()
                    .parse()
                    .map_err(|_| format!("invalid k_max {values:?}"))?
            }
            other => {
                return Err(format!(
                    "unknown grid key {other:?} (expected C, beta, eta, sigma, d or k_max)"
                ))
            }
        }
    }
    Ok(())
}

/// Merges a JSON grid object into the defaults.
pub fn apply_grid_json(
    grid: &mut Grid,
    map: &serde_json::Map<String, serde_json::Value>,
) -> Result<(), String> {
    let mut value = serde_json::to_value(&*grid).map_err(|e| e.to_string())?;
    let obj = value.as_object_mut().expect("grid serializes to an object");
    for (k, v) in map {
        if !obj.contains_key(k) {
            return Err(format!("unknown grid key {k:?}"));
        }
        obj.insert(k.clone(), v.clone());
    }
    *grid = serde_json::from_value(value).map_err(|e| format!("invalid grid: {e}"))?;
    Ok(())
}

pub fn parse_label_column(s: &str) -> Result<Option<LabelColumn>, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    s.parse().map(Some)
}

pub fn method_spec(method: &str, reg: &str, kernelized: bool) -> Result<MethodSpec, String> {
    let method: Method = method.parse()?;
    let reg: Regularizer = reg.parse()?;
    MethodSpec::new(method, reg, kernelized).map_err(|e| e.to_string())
}
