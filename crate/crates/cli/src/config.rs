//! Configuration resolution with the precedence: command-line flag over
//! config-file value over built-in default. Every resolved value is recorded
//! so the full effective configuration can be echoed into output artifacts.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

/// Resolves parameters for one subcommand and records the outcome.
pub struct Resolver {
    /// Top-level config-file table.
    root: toml::Table,
    /// Per-command `[section]` table (wins over the top level).
    section: toml::Table,
    /// Every resolved key/value, for the metadata echo.
    resolved: BTreeMap<String, serde_json::Value>,
}

fn toml_f64(v: &toml::Value) -> Option<f64> {
    v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
}

impl Resolver {
    /// Loads the optional config file and selects the table named after the
    /// subcommand.
    pub fn new(config_path: Option<&Path>, command: &str) -> Result<Self, CliError> {
        let root: toml::Table = match config_path {
            None => toml::Table::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Config(format!("cannot read config file {}: {e}", p.display()))
                })?;
                text.parse().map_err(|e| {
                    CliError::Config(format!("config file {} is not valid TOML: {e}", p.display()))
                })?
            }
        };
        let section = root
            .get(command)
            .and_then(|v| v.as_table())
            .cloned()
            .unwrap_or_default();
        Ok(Resolver { root, section, resolved: BTreeMap::new() })
    }

    fn lookup(&self, key: &str) -> Option<&toml::Value> {
        self.section.get(key).or_else(|| self.root.get(key))
    }

    fn record(&mut self, key: &str, value: serde_json::Value) {
        self.resolved.insert(key.to_string(), value);
    }

    /// The full resolved configuration, for embedding in output metadata.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::Value::Object(self.resolved.clone().into_iter().collect())
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, CliError> {
        let value = match flag {
            Some(v) => v,
            None => match self.lookup(key) {
                Some(v) => toml_f64(v).ok_or_else(|| {
                    CliError::Config(format!("config key `{key}` must be a number"))
                })?,
                None => default,
            },
        };
        self.record(key, serde_json::json!(value));
        Ok(value)
    }

    pub fn usize(&mut self, key: &str, flag: Option<usize>, default: usize) -> Result<usize, CliError> {
        let value = match flag {
            Some(v) => v,
            None => match self.lookup(key) {
                Some(v) => v
                    .as_integer()
                    .and_then(|i| usize::try_from(i).ok())
                    .ok_or_else(|| {
                        CliError::Config(format!("config key `{key}` must be a nonnegative integer"))
                    })?,
                None => default,
            },
        };
        self.record(key, serde_json::json!(value));
        Ok(value)
    }

    pub fn u64(&mut self, key: &str, flag: Option<u64>, default: u64) -> Result<u64, CliError> {
        let value = match flag {
            Some(v) => v,
            None => match self.lookup(key) {
                Some(v) => v
                    .as_integer()
                    .and_then(|i| u64::try_from(i).ok())
                    .ok_or_else(|| {
                        CliError::Config(format!("config key `{key}` must be a nonnegative integer"))
                    })?,
                None => default,
            },
        };
        self.record(key, serde_json::json!(value));
        Ok(value)
    }

    pub fn string(&mut self, key: &str, flag: Option<&str>, default: &str) -> Result<String, CliError> {
        let value = match flag {
            Some(v) => v.to_string(),
            None => match self.lookup(key) {
                Some(v) => v
                    .as_str()
                    .map(str::to_string)
                    .ok_or_else(|| CliError::Config(format!("config key `{key}` must be a string")))?,
                None => default.to_string(),
            },
        };
        self.record(key, serde_json::json!(value));
        Ok(value)
    }

    /// Comma-separated list of reals; a TOML array is also accepted.
    pub fn f64_list(
        &mut self,
        key: &str,
        flag: Option<&str>,
        default: &[f64],
    ) -> Result<Vec<f64>, CliError> {
        let value: Vec<f64> = match flag {
            Some(text) => parse_f64_list(key, text)?,
            None => match self.lookup(key) {
                Some(toml::Value::String(text)) => parse_f64_list(key, text)?,
                Some(toml::Value::Array(items)) => items
                    .iter()
                    .map(|v| {
                        toml_f64(v).ok_or_else(|| {
                            CliError::Config(format!("config key `{key}` must hold numbers"))
                        })
                    })
                    .collect::<Result<_, _>>()?,
                Some(v) => {
                    if let Some(x) = toml_f64(v) {
                        vec![x]
                    } else {
                        return Err(CliError::Config(format!(
                            "config key `{key}` must be a number, list, or comma-separated string"
                        )));
                    }
                }
                None => default.to_vec(),
            },
        };
        self.record(key, serde_json::json!(value));
        Ok(value)
    }
}

pub fn parse_f64_list(key: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("`{key}`: `{s}` is not a number")))
        })
        .collect()
}

/// Parses a `start:end:step` sweep description into grid values (inclusive
/// of `end` up to half a step of rounding).
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!("grid `{text}` must have the form start:end:step")));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Config(format!("grid component `{s}` is not a number")))
        })
        .collect::<Result<_, _>>()?;
    let (start, end, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || end < start {
        return Err(CliError::Config(format!(
            "grid `{text}` must have positive step and end ≥ start"
        )));
    }
    let count = ((end - start) / step + 0.5).floor() as usize + 1;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}
