//! Run configuration: flat `key = value` file merged under command-line flags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use neqfridge::ModelParams64;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Settings shared by every subcommand. Each can come from `--config` or a flag;
/// flags win.
#[derive(Args, Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Overrides {
    #[arg(long)]
    pub e1: Option<f64>,
    #[arg(long)]
    pub e3: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
    #[arg(long)]
    pub t3: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub g: Option<f64>,
    /// Points per curve or sweep.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file, or directory for `figure`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Coefficient tolerance for `validate`.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Ensemble size, or number of random points for `validate`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Carnot COP imposed on the ensemble.
    #[arg(long)]
    pub eta_c: Option<f64>,
    /// Flat `key = value` file with any of the keys above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn read_file(path: &Path) -> Result<Overrides, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| ConfigError(format!("bad config {}: {e}", path.display())))
}

macro_rules! prefer {
    ($flags:ident, $file:ident; $($field:ident),*) => {
        Overrides { $($field: $flags.$field.or($file.$field),)* config: $flags.config }
    };
}

impl Overrides {
    /// Flags layered over the config file, if any.
    pub fn resolve(self) -> Result<Overrides, ConfigError> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let file = read_file(&path)?;
        let flags = self;
        Ok(prefer!(flags, file; e1, e3, gamma, t1, t2, t3, p, g, points, seed, out, tol, n, eta_c))
    }

    pub fn params(&self, defaults: ModelParams64) -> ModelParams64 {
        ModelParams64 {
            e1: self.e1.unwrap_or(defaults.e1),
            e3: self.e3.unwrap_or(defaults.e3),
            gamma: self.gamma.unwrap_or(defaults.gamma),
            t1: self.t1.unwrap_or(defaults.t1),
            t2: self.t2.unwrap_or(defaults.t2),
            t3: self.t3.unwrap_or(defaults.t3),
            p: self.p.unwrap_or(defaults.p),
            g: self.g.unwrap_or(defaults.g),
        }
    }
}

/// The fully resolved settings of one run, embedded in every output file.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: String,
    pub entries: Vec<(String, Value)>,
}

impl RunConfig {
    pub fn new(command: impl Into<String>) -> Self {
        RunConfig { command: command.into(), entries: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.entries.push((key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null)));
        self
    }

    pub fn with_params(self, p: &ModelParams64) -> Self {
        self.with("e1", p.e1)
            .with("e3", p.e3)
            .with("gamma", p.gamma)
            .with("t1", p.t1)
            .with("t2", p.t2)
            .with("t3", p.t3)
            .with("p", p.p)
            .with("g", p.g)
    }

    /// `key=value` pairs in insertion order.
    pub fn pairs(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let v = match v {
                Value::String(text) => text.clone(),
                other => other.to_string(),
            };
            let sep = if s.is_empty() { "" } else { " " };
            let _ = write!(s, "{sep}{k}={v}");
        }
        s
    }
}

impl Serialize for RunConfig {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len() + 1))?;
        map.serialize_entry("command", &self.command)?;
        for (k, v) in &self.entries {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("neqfridge-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "e1 = 1.5\ngamma = 0.2\npoints = 11\neta-c = 0.5\n").unwrap();
        let flags = Overrides { gamma: Some(0.1), config: Some(path.clone()), ..Default::default() };
        let merged = flags.resolve().unwrap();
        assert_eq!(merged.e1, Some(1.5));
        assert_eq!(merged.gamma, Some(0.1));
        assert_eq!(merged.points, Some(11));
        assert_eq!(merged.eta_c, Some(0.5));
        std::fs::write(&path, "nonsense = 1\n").unwrap();
        let flags = Overrides { config: Some(path), ..Default::default() };
        assert!(flags.resolve().is_err());
        std::fs::remove_dir_all(dir).ok();
    }
}
