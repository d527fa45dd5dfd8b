use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

const KNOWN_KEYS: [&str; 18] = [
    "n", "n1", "N1", "N2", "p1", "p2", "alpha", "reps", "seed", "threads", "order", "grid-step", "format", "out",
    "pretty", "sampler", "input", "no-mc",
];

/// Flat key/value settings read from a config file.
#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let parse_err = |message: String| CliError::Parse { path: path.to_path_buf(), message };
        let config = if text.trim_start().starts_with('{') {
            Self::from_json(&text).map_err(parse_err)?
        } else {
            Self::from_key_values(&text).map_err(parse_err)?
        };
        Ok(config)
    }

    /// `key = value` per line; blank lines and `#` comments are skipped.
    pub fn from_key_values(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
            let value = value.trim().trim_matches('"');
            insert(&mut values, key.trim(), value.to_string()).map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(Self { values })
    }

    /// A flat JSON object; arrays become comma-separated lists.
    pub fn from_json(text: &str) -> Result<Self, String> {
        let parsed: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let object = parsed.as_object().ok_or("top level must be a JSON object")?;
        let mut values = BTreeMap::new();
        for (key, value) in object {
            let text = match value {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Array(items) => items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?.join(","),
                other => scalar(other)?,
            };
            insert(&mut values, key, text)?;
        }
        Ok(Self { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key}: cannot parse {raw:?}: {e}"))),
        }
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|item| {
                    item.trim()
                        .parse()
                        .map_err(|e| CliError::Usage(format!("config key {key}: cannot parse {item:?}: {e}")))
                })
                .collect::<CliResult<Vec<T>>>()
                .map(Some),
        }
    }

    pub fn flag(&self, key: &str) -> CliResult<bool> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}

fn scalar(value: &serde_json::Value) -> Result<String, String> {
    match value {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::Bool(b) => Ok(b.to_string()),
        other => Err(format!("unsupported value {other}")),
    }
}

fn insert(values: &mut BTreeMap<String, String>, key: &str, value: String) -> Result<(), String> {
    let key = key.replace('_', "-");
    if !KNOWN_KEYS.contains(&key.as_str()) {
        return Err(format!("unknown key {key:?}"));
    }
    if values.insert(key.clone(), value).is_some() {
        return Err(format!("duplicate key {key:?}"));
    }
    Ok(())
}
