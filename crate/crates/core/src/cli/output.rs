//! CSV files, git-style content hashes and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::CliError;

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes a header row and one row per record, every number with 17 significant digits.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    w.write_record(header).map_err(|e| io(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:.16e}"))).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

/// SHA-256 over `blob <len>\0<content>`, the object hash git uses in its SHA-256 mode.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    format!("{:x}", h.finalize())
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Invariant {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub outputs: Vec<OutputFile>,
    pub invariants: Vec<Invariant>,
    /// "ok" or "failed".
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub results: BTreeMap<String, Value>,
    pub wall_time_s: f64,
}

impl Manifest {
    pub fn new(command: &str, parameters: BTreeMap<String, Value>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            parameters,
            outputs: vec![],
            invariants: vec![],
            status: "ok".into(),
            reason: None,
            results: BTreeMap::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn record_output(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = fs::read(path).map_err(|e| io(path, e))?;
        self.outputs.push(OutputFile { path: path.display().to_string(), bytes: bytes.len(), sha256: content_hash(&bytes) });
        Ok(())
    }

    pub fn check(&mut self, name: &str, pass: bool, value: Option<f64>) {
        self.invariants.push(Invariant { name: name.into(), pass, value });
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn fail(&mut self, reason: impl Into<String>) {
        self.status = "failed".into();
        self.reason = Some(reason.into());
    }

    /// Marks the run failed if any invariant failed.
    pub fn settle(&mut self) {
        if self.status == "ok" {
            let bad: Vec<&str> = self.invariants.iter().filter(|i| !i.pass).map(|i| i.name.as_str()).collect();
            if !bad.is_empty() {
                let reason = format!("invariants failed: {}", bad.join(", "));
                self.fail(reason);
            }
        }
    }

    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        }
        let text = serde_json::to_string_pretty(self).map_err(|e| io(path, e))?;
        fs::write(path, text + "\n").map_err(|e| io(path, e))
    }
}

/// Manifest path next to a CSV output: `h.csv` → `h.manifest.json`.
pub fn manifest_path_for(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    csv.with_file_name(format!("{stem}.manifest.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn git_style_hash() {
        // `git hash-object --object-format=sha256` of an empty file
        assert_eq!(content_hash(b""), "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813");
    }

    #[test]
    fn failed_invariants_fail_the_manifest() {
        let mut m = Manifest::new("x", BTreeMap::new());
        m.check("a", true, None);
        m.settle();
        assert!(m.ok());
        m.check("b", false, Some(1.0));
        m.settle();
        assert!(!m.ok());
        assert!(m.reason.as_deref().unwrap().contains('b'));
        assert_eq!(manifest_path_for(Path::new("out/h.csv")), Path::new("out/h.manifest.json"));
    }
}
