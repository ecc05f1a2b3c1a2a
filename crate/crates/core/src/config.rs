//! Versioned `key: value` documents.
//!
//! Every document starts with a `format: 1` line. Blank lines and lines
//! starting with `#` are ignored.

use std::collections::BTreeMap;

use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `format: {FORMAT_VERSION}` header")]
    MissingFormat,
    #[error("unsupported format version {0}")]
    UnsupportedFormat(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
}

/// Parsed key-value document, keys in insertion order.
#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    entries: Vec<(String, String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<KeyValues, ConfigError> {
        let mut entries = Vec::new();
        let mut saw_format = false;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once(':').ok_or_else(|| ConfigError::Syntax {
                line: n + 1,
                message: format!("expected `key: value`, found `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !saw_format {
                if key != "format" {
                    return Err(ConfigError::MissingFormat);
                }
                if value != FORMAT_VERSION.to_string() {
                    return Err(ConfigError::UnsupportedFormat(value.to_string()));
                }
                saw_format = true;
                continue;
            }
            entries.push((key.to_string(), value.to_string(), n + 1));
        }
        if !saw_format {
            return Err(ConfigError::MissingFormat);
        }
        Ok(KeyValues { entries })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v, _)| (k.as_str(), v.as_str()))
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }
}

pub fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::InvalidValue {
        key: key.to_string(),
        message: e.to_string(),
    })
}
