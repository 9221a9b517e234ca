//! Flat key-value run configuration: one `key = value` pair per line, `#`
//! comments, matrices and vectors as nested arrays of `[re, im]` pairs.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::quantum::{cx, CMatrix, CVector};

#[derive(Debug, Clone)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

impl ConfigEntry {
    fn parse_err(&self, what: &str) -> Error {
        Error::Config(format!(
            "line {}: key `{}`: expected {what}, got `{}`",
            self.line, self.key, self.value
        ))
    }

    pub fn as_f64(&self) -> Result<f64> {
        self.value
            .parse::<f64>()
            .map_err(|_| self.parse_err("a real number"))
    }

    pub fn as_usize(&self) -> Result<usize> {
        self.value
            .parse::<usize>()
            .map_err(|_| self.parse_err("a non-negative integer"))
    }

    pub fn as_u32(&self) -> Result<u32> {
        self.value
            .parse::<u32>()
            .map_err(|_| self.parse_err("a non-negative integer"))
    }

    pub fn as_str(&self) -> &str {
        &self.value
    }

    /// Vector literal `[[re,im],...]`.
    pub fn as_vector(&self) -> Result<CVector> {
        let pairs: Vec<[f64; 2]> = serde_json::from_str(&self.value)
            .map_err(|_| self.parse_err("a vector like [[re,im],...]"))?;
        Ok(CVector::from_iterator(
            pairs.len(),
            pairs.iter().map(|&[re, im]| cx(re, im)),
        ))
    }

    /// Matrix literal `[[[re,im],...],...]`, one inner array per row.
    pub fn as_matrix(&self) -> Result<CMatrix> {
        let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(&self.value)
            .map_err(|_| self.parse_err("a matrix like [[[re,im],...],...]"))?;
        let nrows = rows.len();
        if nrows == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
            return Err(self.parse_err("a rectangular, non-empty matrix"));
        }
        let ncols = rows[0].len();
        Ok(CMatrix::from_fn(nrows, ncols, |i, j| {
            cx(rows[i][j][0], rows[i][j][1])
        }))
    }
}

/// A parsed configuration file with line-level diagnostics.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: Vec<ConfigEntry>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<ConfigEntry> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let stripped = stripped.trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {line}: expected `key = value`, got `{stripped}`"))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(Error::Config(format!(
                    "line {line}: empty key or value in `{stripped}`"
                )));
            }
            if let Some(previous) = entries.iter().find(|e| e.key == key) {
                return Err(Error::Config(format!(
                    "line {line}: key `{key}` already set on line {}",
                    previous.line
                )));
            }
            entries.push(ConfigEntry { key, value, line });
        }
        Ok(Self { entries })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&ConfigEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn require(&self, key: &str) -> Result<&ConfigEntry> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    /// Reject any key outside the allowed set, naming its line.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        let allowed: HashSet<&str> = allowed.iter().copied().collect();
        for entry in &self.entries {
            if !allowed.contains(entry.key.as_str()) {
                return Err(Error::Config(format!(
                    "line {}: unknown key `{}`",
                    entry.line, entry.key
                )));
            }
        }
        Ok(())
    }
}
