//! Flat key-value experiment configs: `key = value` per line, `#` comments.
//!
//! Parse errors carry the offending line number. Typed getters either
//! require a key or fall back to an explicit default.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    path: String,
}

impl Config {
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::ConfigParse {
                    path: path.to_string(),
                    line: idx + 1,
                    msg: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(Error::ConfigParse {
                    path: path.to_string(),
                    line: idx + 1,
                    msg: "empty key".into(),
                });
            }
            values.insert(key.to_string(), value.to_string());
        }
        Ok(Self {
            values,
            path: path.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::ConfigMissingKey(key.to_string()))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.require(key)?.parse().map_err(|e| Error::ConfigBadValue {
            key: key.to_string(),
            msg: format!("{e}"),
        })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| Error::ConfigBadValue {
                key: key.to_string(),
                msg: format!("{e}"),
            }),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| Error::ConfigBadValue {
                key: key.to_string(),
                msg: format!("{e}"),
            }),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    /// Comma-separated list of floats.
    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim().parse().map_err(|e| Error::ConfigBadValue {
                        key: key.to_string(),
                        msg: format!("{e}"),
                    })
                })
                .collect(),
        }
    }
}
