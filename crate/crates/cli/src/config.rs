//! Run configuration: defaults, flat `key = value` files, and flag overrides.
//!
//! Layers are merged as JSON maps (defaults, then file, then flags) and
//! deserialized once, so unknown keys and mistyped values are rejected the
//! same way wherever they come from.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use synodyne::langevin::{Scheme, SimConfig};
use synodyne::optimize::log_grid;
use synodyne::{
    make_params, Coupling, Objective, SystemParams, FIG_GAMMA_M, FIG_NBAR, FIG_OMEGA_M,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// LO used by `simulate`; tones at `omega_s = omega_m` with unit intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoChoice {
    #[default]
    Noise,
    Force,
    Amplitude,
    Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub subcommand: String,
    pub figure: Option<String>,

    pub omega_m: f64,
    pub gamma_m: f64,
    pub nbar: f64,
    pub g: Option<f64>,
    pub cooperativity: Option<f64>,

    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub c_points: usize,
    pub objective: Objective,

    pub dt: f64,
    pub duration: f64,
    pub seed: u64,
    pub run: u64,
    pub segments: usize,
    pub scheme: Scheme,
    pub lo: LoChoice,
    pub force_amplitude: f64,
    pub force_phase: f64,
    pub dump: Option<String>,

    pub format: Format,
    pub output: Option<String>,
}

/// Cooperativity used when neither `g` nor `cooperativity` is given.
pub const DEFAULT_COOPERATIVITY: f64 = 0.9;

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            subcommand: String::new(),
            figure: None,
            omega_m: FIG_OMEGA_M,
            gamma_m: FIG_GAMMA_M,
            nbar: FIG_NBAR,
            g: None,
            cooperativity: None,
            omega_min: 0.0,
            omega_max: 2.0 * FIG_OMEGA_M,
            omega_points: 401,
            c_min: 1e-2,
            c_max: 1e2,
            c_points: 32,
            objective: Objective::Noise,
            dt: 0.125,
            duration: 1048576.0,
            seed: 0x5EED,
            run: 0,
            segments: 16,
            scheme: Scheme::Exact,
            lo: LoChoice::Noise,
            force_amplitude: 0.0,
            force_phase: 0.0,
            dump: None,
            format: Format::Csv,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn params(&self) -> Result<SystemParams> {
        let coupling = match (self.g, self.cooperativity) {
            (None, None) => Coupling::Cooperativity(DEFAULT_COOPERATIVITY),
            (g, c) => Coupling::from_options(g, c)?,
        };
        Ok(make_params(
            self.omega_m,
            self.gamma_m,
            self.nbar,
            coupling,
        )?)
    }

    pub fn omega_grid(&self) -> Result<Vec<f64>> {
        if self.omega_points < 2 || !(self.omega_max > self.omega_min) || self.omega_min < 0.0 {
            bail!(
                "bad frequency grid [{}, {}] x {}",
                self.omega_min,
                self.omega_max,
                self.omega_points
            );
        }
        let n = self.omega_points - 1;
        Ok((0..=n)
            .map(|i| self.omega_min + (self.omega_max - self.omega_min) * i as f64 / n as f64)
            .collect())
    }

    pub fn cooperativity_grid(&self) -> Result<Vec<f64>> {
        Ok(log_grid(self.c_min, self.c_max, self.c_points)?)
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            dt: self.dt,
            duration: self.duration,
            seed: self.seed,
            run: self.run,
            segments: self.segments,
            force: None,
            scheme: self.scheme,
        }
    }
}

/// Typed value for a flat-file entry: integers, floats, booleans, else text.
fn scalar(raw: &str) -> Value {
    if let Ok(u) = raw.parse::<u64>() {
        return Value::from(u);
    }
    if let Ok(i) = raw.parse::<i64>() {
        return Value::from(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        if let Some(n) = serde_json::Number::from_f64(f) {
            return Value::Number(n);
        }
    }
    match raw {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        "none" | "null" => Value::Null,
        _ => Value::String(raw.to_string()),
    }
}

/// Parses either a flat `key = value` file (`#` starts a comment) or a JSON
/// object as emitted under `config` in JSON output.
pub fn parse_config_text(text: &str) -> Result<Map<String, Value>> {
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text).context("config is not valid JSON")?;
        return match v {
            Value::Object(m) => Ok(m),
            _ => bail!("JSON config must be an object"),
        };
    }
    let mut map = Map::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected `key = value`", n + 1);
        };
        let key = key.trim();
        if key.is_empty() {
            bail!("config line {}: empty key", n + 1);
        }
        let value = value.trim().trim_matches('"');
        if map.insert(key.to_string(), scalar(value)).is_some() {
            bail!("config line {}: duplicate key `{key}`", n + 1);
        }
    }
    Ok(map)
}

pub fn load_config_file(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_config_text(&text).with_context(|| format!("in config {}", path.display()))
}

/// Merges layers left to right over the defaults and validates the result.
pub fn resolve(layers: &[Map<String, Value>]) -> Result<RunConfig> {
    let mut merged = match serde_json::to_value(RunConfig::default())? {
        Value::Object(m) => m,
        _ => unreachable!("RunConfig serializes to an object"),
    };
    for layer in layers {
        for (k, v) in layer {
            merged.insert(k.clone(), v.clone());
        }
    }
    let cfg: RunConfig =
        serde_json::from_value(Value::Object(merged)).context("invalid configuration")?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_file() {
        let m = parse_config_text(
            "# preset\nomega_m = 0.3\nseed=42 \nobjective = force # trailing\n\n",
        )
        .unwrap();
        let cfg = resolve(&[m]).unwrap();
        assert_eq!(cfg.omega_m, 0.3);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.objective, Objective::Force);
        assert_eq!(cfg.gamma_m, FIG_GAMMA_M);
    }

    #[test]
    fn unknown_key_rejected() {
        let m = parse_config_text("omgea_m = 0.3").unwrap();
        assert!(resolve(&[m]).is_err());
    }

    #[test]
    fn bad_lines_rejected() {
        assert!(parse_config_text("just words").is_err());
        assert!(parse_config_text("a = 1\na = 2").is_err());
        assert!(resolve(&[parse_config_text("seed = -3").unwrap()]).is_err());
        assert!(resolve(&[parse_config_text("objective = loud").unwrap()]).is_err());
    }

    #[test]
    fn later_layers_win() {
        let file = parse_config_text("nbar = 1\ndt = 0.1").unwrap();
        let flags = parse_config_text("nbar = 2").unwrap();
        let cfg = resolve(&[file, flags]).unwrap();
        assert_eq!(cfg.nbar, 2.0);
        assert_eq!(cfg.dt, 0.1);
    }

    #[test]
    fn json_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.subcommand = "simulate".into();
        cfg.g = Some(0.03);
        cfg.scheme = Scheme::EulerMaruyama;
        cfg.output = Some("out.csv".into());
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = resolve(&[parse_config_text(&text).unwrap()]).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn coupling_resolution() {
        let cfg = RunConfig::default();
        assert!((cfg.params().unwrap().cooperativity() - DEFAULT_COOPERATIVITY).abs() < 1e-12);
        let both = RunConfig {
            g: Some(0.03),
            cooperativity: Some(0.9),
            ..RunConfig::default()
        };
        assert!(both.params().is_err());
    }

    #[test]
    fn integer_valued_floats_accepted() {
        let cfg = resolve(&[parse_config_text("omega_m = 1\nduration = 1000").unwrap()]).unwrap();
        assert_eq!(cfg.omega_m, 1.0);
        assert_eq!(cfg.duration, 1000.0);
    }
}
