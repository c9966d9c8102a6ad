//! JSON run configuration with dotted-path overrides.
//!
//! Required: `d`, `sampler`, `grid.{x_min, x_max, step, epsilon}`. Every other
//! section falls back to defaults. Errors name the offending field path.

use std::path::Path;

use semimix::{EntryOverride, ProfileLaw, ProfileSampler, SolverSettings};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// A configuration problem, reported with the path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn err(path: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{path}: {msg}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub d: usize,
    pub sampler: SamplerConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub monte_carlo: MonteCarloConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub clt: CltConfig,
    #[serde(default)]
    pub moments: MomentsConfig,
    #[serde(default)]
    pub compare: CompareConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    #[serde(flatten)]
    pub law: ProfileLaw,
    #[serde(default)]
    pub overrides: Vec<EntryOverride>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub step: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: SolverSettings::DEFAULT_TOL,
            max_iter: SolverSettings::DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    #[serde(rename = "M")]
    pub draws: usize,
    pub seed: u64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { draws: 1000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    #[serde(rename = "block_N")]
    pub block_n: usize,
    pub n_matrices: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            block_n: 100,
            n_matrices: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CltConfig {
    #[serde(rename = "N_sums")]
    pub n_sums: Vec<usize>,
    #[serde(rename = "matrix_N")]
    pub matrix_n: usize,
    pub trials: usize,
    pub moments: Vec<usize>,
}

impl Default for CltConfig {
    fn default() -> Self {
        Self {
            n_sums: vec![1, 4, 16, 64],
            matrix_n: 200,
            trials: 50,
            moments: vec![2, 4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentsConfig {
    pub orders: Vec<usize>,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        Self { orders: vec![2, 4, 6] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareConfig {
    pub bin_width: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { bin_width: 0.1 }
    }
}

/// Sets `path` (dot-separated) in `root` to `value`, creating objects as
/// needed. `value` is parsed as JSON, falling back to a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError(format!("override `{assignment}` is not of the form path=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError(format!("override path `{path}` is malformed")));
    }
    let mut node = root;
    for (depth, key) in keys.iter().enumerate() {
        let object = node
            .as_object_mut()
            .ok_or_else(|| err(&keys[..depth].join("."), "is not an object"))?;
        if depth + 1 == keys.len() {
            object.insert((*key).to_string(), value);
            return Ok(());
        }
        node = object
            .entry((*key).to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("path has at least one key")
}

/// Parses a JSON value, reporting the full path of the offending field.
pub fn from_value(value: Value) -> Result<RunConfig, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        let located = match inner.strip_prefix("missing field `").and_then(|r| r.split_once('`')) {
            Some((field, _)) if path == "." => field.to_string(),
            Some((field, _)) => format!("{path}.{field}"),
            None => path,
        };
        err(&located, inner)
    })
}

impl RunConfig {
    /// Reads `path`, applies overrides in order and validates.
    pub fn load(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut value: Value =
            serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: invalid JSON: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        if let Some(seed) = seed {
            apply_override(&mut value, &format!("monte_carlo.seed={seed}"))?;
        }
        let config = from_value(value)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.d == 0 {
            return Err(err("d", "must be positive"));
        }
        self.profile_sampler()?;
        let g = &self.grid;
        if !(g.step > 0.0 && g.step.is_finite()) {
            return Err(err("grid.step", "must be positive"));
        }
        if !(g.x_min.is_finite() && g.x_max.is_finite() && g.x_min < g.x_max) {
            return Err(err("grid.x_min", "need x_min < x_max"));
        }
        if !(g.epsilon > 0.0 && g.epsilon.is_finite()) {
            return Err(err("grid.epsilon", "must be positive"));
        }
        self.solver_settings()?;
        let positive = [
            ("monte_carlo.M", self.monte_carlo.draws),
            ("simulate.block_N", self.simulate.block_n),
            ("simulate.n_matrices", self.simulate.n_matrices),
            ("clt.matrix_N", self.clt.matrix_n),
            ("clt.trials", self.clt.trials),
        ];
        for (path, v) in positive {
            if v == 0 {
                return Err(err(path, "must be positive"));
            }
        }
        if self.clt.n_sums.contains(&0) {
            return Err(err("clt.N_sums", "entries must be positive"));
        }
        if !(self.compare.bin_width > 0.0 && self.compare.bin_width.is_finite()) {
            return Err(err("compare.bin_width", "must be positive"));
        }
        Ok(())
    }

    pub fn profile_sampler(&self) -> Result<ProfileSampler, ConfigError> {
        ProfileSampler::new(self.d, self.sampler.law.clone(), self.sampler.overrides.clone())
            .map_err(|e| err("sampler", e))
    }

    pub fn solver_settings(&self) -> Result<SolverSettings, ConfigError> {
        SolverSettings::new(self.solver.tol, self.solver.max_iter, self.grid.epsilon).map_err(|e| err("solver", e))
    }

    pub fn seed(&self) -> u64 {
        self.monte_carlo.seed
    }

    /// SHA-256 of the resolved configuration serialized as JSON.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
