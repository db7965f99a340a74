//! Run configuration: defaults, then the declarative config file, then
//! command-line flags, later layers winning.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use igr1d::{DensitySpec, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataMode {
    Regularized,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutFormat {
    Csv,
    Json,
}

impl OutFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutFormat::Csv => "csv",
            OutFormat::Json => "json",
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: String,
    pub a: f64,
    pub b: f64,
    pub amplitude: f64,
    pub density: String,
    pub alpha: Option<f64>,
    pub t: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub grid: usize,
    pub data_mode: DataMode,
    pub out: PathBuf,
    pub format: OutFormat,
    pub seed: u64,
    pub parallel: bool,
    pub alphas: Option<Vec<f64>>,
    pub pairs: usize,
    pub ns: Option<Vec<usize>>,
    pub deltas: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: "sinewave".into(),
            a: 0.0,
            b: 1.0,
            amplitude: 1.0,
            density: "uniform".into(),
            alpha: None,
            t: None,
            times: None,
            grid: 256,
            data_mode: DataMode::Regularized,
            out: PathBuf::from("out"),
            format: OutFormat::Csv,
            seed: 42,
            parallel: false,
            alphas: None,
            pairs: 200,
            ns: None,
            deltas: None,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| ConfigError(format!("{key}: expected a number, got '{v}'")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| ConfigError(format!("{key}: expected an integer, got '{v}'")))
}

pub fn parse_list_f64(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_f64(key, s))
        .collect()
}

pub fn parse_list_usize(key: &str, v: &str) -> Result<Vec<usize>, ConfigError> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_usize(key, s))
        .collect()
}

impl RunConfig {
    /// Apply one key/value pair (config file key or flag).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "scenario" => self.scenario = value.trim().to_string(),
            "a" => self.a = parse_f64(key, value)?,
            "b" => self.b = parse_f64(key, value)?,
            "amplitude" => self.amplitude = parse_f64(key, value)?,
            "density" => self.density = value.trim().to_string(),
            "alpha" => self.alpha = Some(parse_f64(key, value)?),
            "t" => self.t = Some(parse_f64(key, value)?),
            "times" => self.times = Some(parse_list_f64(key, value)?),
            "grid" => self.grid = parse_usize(key, value)?,
            "data_mode" | "data-mode" => {
                self.data_mode = match value.trim() {
                    "regularized" => DataMode::Regularized,
                    "raw" => DataMode::Raw,
                    other => {
                        return Err(ConfigError(format!(
                            "data_mode must be 'regularized' or 'raw', got '{other}'"
                        )))
                    }
                }
            }
            "out" => self.out = PathBuf::from(value.trim()),
            "format" => {
                self.format = match value.trim() {
                    "csv" => OutFormat::Csv,
                    "json" => OutFormat::Json,
                    other => {
                        return Err(ConfigError(format!(
                            "format must be 'csv' or 'json', got '{other}'"
                        )))
                    }
                }
            }
            "seed" => {
                self.seed = value
                    .trim()
                    .parse()
                    .map_err(|_| ConfigError(format!("seed: expected an integer, got '{value}'")))?
            }
            "parallel" => {
                self.parallel = match value.trim() {
                    "on" | "true" | "1" => true,
                    "off" | "false" | "0" => false,
                    other => {
                        return Err(ConfigError(format!(
                            "parallel must be 'on' or 'off', got '{other}'"
                        )))
                    }
                }
            }
            "alphas" => self.alphas = Some(parse_list_f64(key, value)?),
            "pairs" => self.pairs = parse_usize(key, value)?,
            "ns" => self.ns = Some(parse_list_usize(key, value)?),
            "deltas" => self.deltas = Some(parse_list_f64(key, value)?),
            other => return Err(ConfigError(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Load key/value pairs from a config file: either `key = value` lines
    /// with `#` comments, or a flat JSON object.
    pub fn load_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| ConfigError(format!("invalid JSON config: {e}")))?;
            let object = value
                .as_object()
                .ok_or_else(|| ConfigError("config JSON must be an object".into()))?;
            let entries: BTreeMap<String, String> = object
                .iter()
                .map(|(k, v)| {
                    let rendered = match v {
                        serde_json::Value::String(s) => s.clone(),
                        serde_json::Value::Array(items) => items
                            .iter()
                            .map(render_json_scalar)
                            .collect::<Vec<_>>()
                            .join(","),
                        other => render_json_scalar(other),
                    };
                    (k.clone(), rendered)
                })
                .collect();
            for (k, v) in entries {
                self.set(&k, &v)?;
            }
        } else {
            for (lineno, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    ConfigError(format!("line {}: expected key=value", lineno + 1))
                })?;
                self.set(key.trim(), value.trim())?;
            }
        }
        Ok(())
    }

    /// Instantiate the scenario this config describes.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let density = match self.density.as_str() {
            "uniform" => DensitySpec::Uniform,
            "ramp" => DensitySpec::Ramp,
            other => match other.strip_prefix("bump:") {
                Some(amp) => DensitySpec::Bump(parse_f64("density", amp)?),
                None => {
                    return Err(ConfigError(format!(
                        "density must be 'uniform', 'ramp' or 'bump:AMP', got '{other}'"
                    )))
                }
            },
        };
        Scenario::by_name(&self.scenario)
            .and_then(|s| s.with_interval(self.a, self.b))
            .and_then(|s| s.with_amplitude(self.amplitude))
            .map(|s| s.with_seed(self.seed).with_density(density))
            .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn require_alpha(&self) -> Result<f64, ConfigError> {
        self.alpha
            .ok_or_else(|| ConfigError("alpha is required (use --alpha or the config file)".into()))
    }
}

fn render_json_scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let mut cfg = RunConfig::default();
        cfg.set("alpha", "0.1").unwrap();
        cfg.set("alpha", "0.01").unwrap();
        assert_eq!(cfg.alpha, Some(0.01));
    }

    #[test]
    fn parses_key_value_file() {
        let dir = std::env::temp_dir().join("igr1d-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(
            &path,
            "# comment\nscenario = twoblock\nalpha=0.05\ntimes = 0.1, 0.2\n",
        )
        .unwrap();
        let mut cfg = RunConfig::default();
        cfg.load_file(&path).unwrap();
        assert_eq!(cfg.scenario, "twoblock");
        assert_eq!(cfg.alpha, Some(0.05));
        assert_eq!(cfg.times, Some(vec![0.1, 0.2]));
    }

    #[test]
    fn parses_json_file() {
        let dir = std::env::temp_dir().join("igr1d-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.json");
        std::fs::write(
            &path,
            "{\"scenario\": \"randomfield\", \"grid\": 64, \"times\": [0.1, 0.3]}",
        )
        .unwrap();
        let mut cfg = RunConfig::default();
        cfg.load_file(&path).unwrap();
        assert_eq!(cfg.scenario, "randomfield");
        assert_eq!(cfg.grid, 64);
        assert_eq!(cfg.times, Some(vec![0.1, 0.3]));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("viscosity", "1").is_err());
        assert!(cfg.set("alpha", "abc").is_err());
        assert!(cfg.set("format", "xml").is_err());
    }
}
