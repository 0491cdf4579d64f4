//! `key = value` configuration files and the flag > file > default precedence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use super::CliError;

/// Keys accepted by every subcommand.
pub const GLOBAL_KEYS: &[&str] = &["n", "potential", "out", "seed"];

/// Parses `key = value` lines; `#` starts a comment, blank lines are ignored.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`, got {raw:?}", no + 1)))?;
        let key = k.trim().trim_start_matches("--").to_string();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", no + 1)));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config key {key:?} given twice")));
        }
    }
    Ok(map)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Resolves each parameter from its flag, the config file, or its default, and records the
/// effective value for the manifest.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    consumed: BTreeSet<String>,
    pub effective: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self { file, ..Default::default() }
    }

    fn from_file<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        self.consumed.insert(key.to_string());
        match self.file.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key:?}: cannot parse {s:?}: {e}"))),
        }
    }

    /// The effective value of `key`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Into<Value> + Clone,
        T::Err: Display,
    {
        let file = self.from_file::<T>(key)?;
        let v = flag.or(file).unwrap_or(default);
        self.effective.insert(key.to_string(), v.clone().into());
        Ok(v)
    }

    /// Like `get` for parameters with no default.
    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Into<Value> + Clone,
        T::Err: Display,
    {
        let file = self.from_file::<T>(key)?;
        let v = flag.or(file);
        self.effective.insert(key.to_string(), v.clone().map(Into::into).unwrap_or(Value::Null));
        Ok(v)
    }

    /// Boolean switches: a flag can only turn them on; the file may say true/false.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        let file = self.from_file::<bool>(key)?;
        let v = flag || file.unwrap_or(false);
        self.effective.insert(key.to_string(), v.into());
        Ok(v)
    }

    /// Fails on any file key that no parameter of the subcommand consumed.
    pub fn finish(&self) -> Result<(), CliError> {
        for key in self.file.keys() {
            if !self.consumed.contains(key) && !GLOBAL_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("unknown config key {key:?}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_overrides_file_overrides_default() {
        let file = parse_config("dx = 0.02\n# comment\n\nt0 = 1e3  # trailing\n").unwrap();
        let mut r = Resolver::new(file);
        assert_eq!(r.get("dx", Some(0.01), 0.05).unwrap(), 0.01);
        assert_eq!(r.get("t0", None, 5.0).unwrap(), 1e3);
        assert_eq!(r.get("t1", None, 2e3).unwrap(), 2e3);
        r.finish().unwrap();
        assert_eq!(r.effective["dx"], serde_json::json!(0.01));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_config("dx 0.02").is_err());
        assert!(parse_config("dx = 1\ndx = 2").is_err());
        let mut r = Resolver::new(parse_config("bogus = 1\ndx = abc").unwrap());
        assert!(r.get("dx", None, 0.1).is_err());
        let err = r.finish().unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }
}
