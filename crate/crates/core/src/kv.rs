//! Flat `key = value` text files with `#` comments, as used for scenario and
//! simulation configs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct Entry {
    pub value: String,
    pub line: usize,
}

/// Parsed key/value pairs that remember where each key came from so later
/// validation errors can point at the offending line.
#[derive(Debug, Clone)]
pub(crate) struct KvFile {
    pub path: PathBuf,
    entries: BTreeMap<String, Entry>,
}

impl KvFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(config_err(
                    path,
                    line,
                    format!("expected `key = value`, got `{content}`"),
                ));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(config_err(path, line, "empty key"));
            }
            if value.is_empty() {
                return Err(config_err(path, line, format!("missing value for `{key}`")));
            }
            if let Some(prev) = entries.get(key) {
                let prev: &Entry = prev;
                return Err(config_err(
                    path,
                    line,
                    format!("duplicate key `{key}` (first set on line {})", prev.line),
                ));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries,
        })
    }

    /// Fails on the first key not in `allowed`.
    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for (key, entry) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(self.err(entry.line, format!("unknown key `{key}`")));
            }
        }
        Ok(())
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.line)
    }

    pub fn err(&self, line: usize, message: impl Into<String>) -> Error {
        config_err(&self.path, line, message)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        let Some(entry) = self.entries.get(key) else {
            return Ok(None);
        };
        entry
            .value
            .parse::<T>()
            .map(Some)
            .map_err(|_| self.err(entry.line, format!("cannot parse `{}` for `{key}`", entry.value)))
    }

    pub fn set<T: FromStr>(&self, key: &str, slot: &mut T) -> Result<()> {
        if let Some(v) = self.get(key)? {
            *slot = v;
        }
        Ok(())
    }

    /// Comma-separated list value.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(entry) = self.entries.get(key) else {
            return Ok(None);
        };
        entry
            .value
            .split(',')
            .map(|item| {
                let item = item.trim();
                item.parse::<T>()
                    .map_err(|_| self.err(entry.line, format!("cannot parse list item `{item}` for `{key}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }
}

fn config_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}
