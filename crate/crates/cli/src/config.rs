//! Pipeline configuration: defaults, config files (JSON or `key = value`),
//! and command-line overrides.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};
use lptime_core::moments::DEFAULT_TAIL_THRESHOLD;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    /// CSV column holding the series; the last column when absent.
    pub column: Option<String>,
    /// Convert prices to log returns before analysis.
    pub returns: bool,
    pub k: usize,
    pub k_moments: usize,
    /// Cumulative share of squared LP moments that defines the tail index.
    pub tail_threshold: f64,
    /// Lag used by single-lag reports (comoment, copula, quantcorr, ...).
    pub lag: usize,
    /// Largest lag for the correlogram and the AutoLPinfor curve.
    pub max_lag: usize,
    /// Points of the interior probability grid `i / (grid + 1)`.
    pub grid: usize,
    /// Points per axis of the copula density grid.
    pub copula_grid: usize,
    /// Conditioning levels for conditional quantiles.
    pub u: Vec<f64>,
    /// Probability levels of the conditional quantiles.
    pub levels: Vec<f64>,
    pub n_sim: usize,
    pub seed: Option<u64>,
    pub format: Format,
    /// Largest Burg order for the spectra.
    pub max_order: usize,
    pub spectrum_grid: usize,
    /// LP components entering the VAR; non-flat ones when absent.
    pub components: Option<Vec<usize>>,
    pub var_max_order: usize,
    pub copspec_u: f64,
    pub copspec_v: f64,
    pub copspec_lags: usize,
    pub steps: usize,
    pub output: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            column: None,
            returns: false,
            k: 4,
            k_moments: 20,
            tail_threshold: DEFAULT_TAIL_THRESHOLD,
            lag: 1,
            max_lag: 20,
            grid: 99,
            copula_grid: 50,
            u: vec![0.05, 0.25, 0.5, 0.75, 0.95],
            levels: vec![0.01, 0.05, 0.5, 0.95, 0.99],
            n_sim: 10_000,
            seed: None,
            format: Format::Json,
            max_order: 20,
            spectrum_grid: 512,
            components: None,
            var_max_order: 12,
            copspec_u: 0.1,
            copspec_v: 0.1,
            copspec_lags: 50,
            steps: 10,
            output: None,
            out_dir: None,
        }
    }
}

fn in_unit(name: &str, values: &[f64]) -> CliResult<()> {
    match values.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        Some(p) => Err(CliError::Config(format!("{name} value {p} is outside (0, 1)"))),
        None => Ok(()),
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> CliResult<()> {
        let positive = [
            ("k", self.k),
            ("k_moments", self.k_moments),
            ("lag", self.lag),
            ("max_lag", self.max_lag),
            ("grid", self.grid),
            ("copula_grid", self.copula_grid),
            ("n_sim", self.n_sim),
            ("max_order", self.max_order),
            ("var_max_order", self.var_max_order),
            ("copspec_lags", self.copspec_lags),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(CliError::Config(format!("{name} must be positive")));
        }
        if self.spectrum_grid < 2 {
            return Err(CliError::Config("spectrum_grid must be at least 2".into()));
        }
        if self.k_moments < self.k {
            return Err(CliError::Config("k_moments must be at least k".into()));
        }
        in_unit("u", &self.u)?;
        in_unit("levels", &self.levels)?;
        in_unit("copspec_u", &[self.copspec_u])?;
        in_unit("copspec_v", &[self.copspec_v])?;
        in_unit("tail_threshold", &[self.tail_threshold])?;
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(CliError::Config("levels must be non-empty and ascending".into()));
        }
        if self.u.is_empty() {
            return Err(CliError::Config("u must be non-empty".into()));
        }
        if let Some(c) = &self.components {
            if c.is_empty() || c.iter().any(|&j| j == 0 || j > self.k) {
                return Err(CliError::Config(format!("components must lie in 1..={}", self.k)));
            }
        }
        Ok(())
    }

    /// Seed to use, generating and storing one if none was configured.
    /// Returns whether it was generated.
    pub fn materialize_seed(&mut self) -> bool {
        if self.seed.is_some() {
            return false;
        }
        self.seed = Some(rand::random::<u64>());
        true
    }
}

fn scalar(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Parses `key = value` lines; `#` starts a comment. Comma-separated values
/// become arrays.
pub fn parse_key_values(text: &str) -> CliResult<Map<String, Value>> {
    let mut map = Map::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let parsed = if value.contains(',') && !value.starts_with('[') {
            Value::Array(value.split(',').map(|v| scalar(v.trim())).collect())
        } else {
            scalar(value)
        };
        map.insert(key, parsed);
    }
    Ok(map)
}

pub fn load_config_file(path: &Path) -> CliResult<PipelineConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let value = if text.trim_start().starts_with('{') {
        serde_json::from_str(&text)?
    } else {
        let mut map = parse_key_values(&text)?;
        // a single listed component arrives as a scalar
        if let Some(v @ Value::Number(_)) = map.get("components").cloned() {
            map.insert("components".into(), Value::Array(vec![v]));
        }
        for key in ["u", "levels"] {
            if let Some(v @ Value::Number(_)) = map.get(key).cloned() {
                map.insert(key.into(), Value::Array(vec![v]));
            }
        }
        Value::Object(map)
    };
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Config file, JSON or `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Input CSV with a header row.
    #[arg(long, short, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub column: Option<String>,
    /// Treat the column as prices and analyse log returns.
    #[arg(long, global = true)]
    pub returns: bool,
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub k_moments: Option<usize>,
    #[arg(long, global = true)]
    pub tail_threshold: Option<f64>,
    #[arg(long, global = true)]
    pub lag: Option<usize>,
    #[arg(long, global = true)]
    pub max_lag: Option<usize>,
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub copula_grid: Option<usize>,
    /// Conditioning levels, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub u: Option<Vec<f64>>,
    /// Quantile levels, comma separated and ascending.
    #[arg(long, global = true, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub n_sim: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub max_order: Option<usize>,
    #[arg(long, global = true)]
    pub spectrum_grid: Option<usize>,
    /// LP components for the VAR, comma separated (1-based).
    #[arg(long, global = true, value_delimiter = ',')]
    pub components: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub var_max_order: Option<usize>,
    #[arg(long, global = true)]
    pub copspec_u: Option<f64>,
    #[arg(long, global = true)]
    pub copspec_v: Option<f64>,
    /// Number of lags `H` in the copula spectral density.
    #[arg(long = "H", global = true)]
    pub copspec_lags: Option<usize>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Bundle directory for `run`.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

macro_rules! apply {
    ($cfg:ident, $args:ident; $($field:ident),*) => {
        $(if let Some(v) = $args.$field.clone() { $cfg.$field = v; })*
    };
}

impl ConfigArgs {
    /// Config file (if any) overlaid with the flags, validated.
    pub fn resolve(&self) -> CliResult<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_config_file(p)?,
            None => PipelineConfig::default(),
        };
        apply!(cfg, self; k, k_moments, tail_threshold, lag, max_lag, grid, copula_grid, u, levels, n_sim,
            format, max_order, spectrum_grid, var_max_order, copspec_u, copspec_v,
            copspec_lags, steps);
        if self.input.is_some() {
            cfg.input = self.input.clone();
        }
        if self.column.is_some() {
            cfg.column = self.column.clone();
        }
        if self.returns {
            cfg.returns = true;
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        if self.components.is_some() {
            cfg.components = self.components.clone();
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        if self.out_dir.is_some() {
            cfg.out_dir = self.out_dir.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_value_parsing() {
        let m = parse_key_values("k = 6\n# comment\nlevels = 0.1, 0.5,0.9\ncolumn = close # trailing\nreturns = true\n").unwrap();
        assert_eq!(m["k"], Value::from(6));
        assert_eq!(m["levels"], serde_json::json!([0.1, 0.5, 0.9]));
        assert_eq!(m["column"], Value::from("close"));
        assert_eq!(m["returns"], Value::from(true));
        assert!(parse_key_values("nonsense").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("lptime-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.txt");
        std::fs::write(&path, "k = 6\nn_sim = 500\ncomponents = 2\n").unwrap();
        let args = ConfigArgs {
            config: Some(path.clone()),
            n_sim: Some(100),
            ..Default::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.k, 6);
        assert_eq!(cfg.n_sim, 100);
        assert_eq!(cfg.components, Some(vec![2]));
        std::fs::write(&path, "{\"k\": 3, \"seed\": 9}").unwrap();
        let cfg = ConfigArgs { config: Some(path.clone()), ..Default::default() }.resolve().unwrap();
        assert_eq!((cfg.k, cfg.seed), (3, Some(9)));
        std::fs::write(&path, "bogus_key = 1\n").unwrap();
        assert!(matches!(
            ConfigArgs { config: Some(path), ..Default::default() }.resolve(),
            Err(CliError::Config(_))
        ));
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn validation() {
        let mut c = PipelineConfig::default();
        assert!(c.validate().is_ok());
        c.levels = vec![0.5, 0.1];
        assert!(c.validate().is_err());
        let c = PipelineConfig { k: 0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = PipelineConfig { components: Some(vec![5]), ..Default::default() };
        assert!(c.validate().is_err());
        let c = PipelineConfig { tail_threshold: 1.0, ..Default::default() };
        assert!(c.validate().is_err());
        let args = ConfigArgs { tail_threshold: Some(0.9), ..Default::default() };
        assert_eq!(args.resolve().unwrap().tail_threshold, 0.9);
        let mut c = PipelineConfig::default();
        assert!(c.materialize_seed());
        assert!(c.seed.is_some() && !c.materialize_seed());
    }
}
