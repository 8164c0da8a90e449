//! Flat `key=value` settings: config file entries overridden by flags.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

/// One configurable key with its command-line spelling.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub key: &'static str,
    pub flag: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

pub const fn key(key: &'static str, flag: &'static str, default: Option<&'static str>, help: &'static str) -> KeySpec {
    KeySpec {
        key,
        flag,
        default,
        help,
    }
}

/// Keys that shape where and how output is written but not what is computed.
/// They are accepted everywhere and left out of the config echo.
pub const PRESENTATION_KEYS: [&str; 4] = ["out", "format", "prime.limit", "prime.cache"];

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; duplicate keys are an error.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::usage(format!("config line {}: empty key", i + 1)));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::usage(format!("config line {}: duplicate key `{k}`", i + 1)));
        }
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Renders a map in the format [`parse_config_text`] reads.
pub fn to_config_text(map: &BTreeMap<String, String>) -> String {
    map.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Layers defaults, then file entries, then flags. File keys outside
    /// `specs` are rejected.
    pub fn merge(
        specs: &[KeySpec],
        file: BTreeMap<String, String>,
        flags: BTreeMap<String, String>,
    ) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for spec in specs {
            if let Some(d) = spec.default {
                values.insert(spec.key.to_string(), d.to_string());
            }
        }
        for (k, v) in file {
            if !specs.iter().any(|s| s.key == k) {
                return Err(CliError::usage(format!("unknown config key `{k}`")));
            }
            values.insert(k, v);
        }
        values.extend(flags);
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::usage(format!("missing required setting `{key}`")))
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        parse_f64(key, self.require(key)?)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        parse_count(key, self.require(key)?)
    }

    pub fn opt_u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        self.get(key).map(|v| parse_count(key, v)).transpose()
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let raw = self.require(key)?;
        let list = raw
            .split(',')
            .map(|item| parse_f64(key, item.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(list)
    }

    /// Everything that determines the computed result.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .filter(|(k, _)| !PRESENTATION_KEYS.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

fn parse_f64(key: &str, raw: &str) -> Result<f64, CliError> {
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::usage(format!("`{key}`: expected a finite number, got `{raw}`")))
}

/// Nonnegative integer, also accepted in float notation such as `1e8`.
fn parse_count(key: &str, raw: &str) -> Result<u64, CliError> {
    if let Ok(v) = raw.parse::<u64>() {
        return Ok(v);
    }
    match raw.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 => Ok(v as u64),
        _ => Err(CliError::usage(format!("`{key}`: expected a nonnegative integer, got `{raw}`"))),
    }
}
