//! Output writers and input readers: CSV tables, `NVF1` field snapshots, experiment manifests
//! and `key=value` configuration files.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{NvError, Result};
use crate::solver::FieldState;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"NVF1";
pub const SNAPSHOT_HEADER_LEN: usize = 32;

/// Shortest round-trip decimal form. Never locale dependent.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

/// A CSV table held in memory. Fields never contain commas or quotes.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| fmt_f64(x)).collect());
    }
}

/// `'\n'`-terminated lines, header first.
impl fmt::Display for CsvTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(f, "{}", r.join(","))?;
        }
        Ok(())
    }
}

pub fn write_csv(path: &Path, table: &CsvTable) -> Result<()> {
    fs::write(path, table.to_string()).map_err(|e| NvError::io(path, e))
}

pub fn encode_snapshot(state: &FieldState) -> Vec<u8> {
    let mut out = Vec::with_capacity(SNAPSHOT_HEADER_LEN + 8 * state.values.len());
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&(state.n as u32).to_le_bytes());
    out.extend_from_slice(&state.half_length.to_le_bytes());
    out.extend_from_slice(&state.energy.to_le_bytes());
    out.extend_from_slice(&state.time.to_le_bytes());
    for v in &state.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn le_f64(b: &[u8]) -> f64 {
    f64::from_le_bytes(b.try_into().expect("8 bytes"))
}

/// Parses an `NVF1` byte stream. `path` is only used in error messages.
pub fn decode_snapshot(bytes: &[u8], path: &Path) -> Result<FieldState> {
    let bad = |reason: String| NvError::Format { path: path.to_path_buf(), reason };
    if bytes.len() < SNAPSHOT_HEADER_LEN {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != SNAPSHOT_MAGIC {
        return Err(bad("missing NVF1 magic".into()));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let (l, e, t) = (le_f64(&bytes[8..16]), le_f64(&bytes[16..24]), le_f64(&bytes[24..32]));
    let expected = n
        .checked_mul(n)
        .and_then(|m| m.checked_mul(8))
        .and_then(|m| m.checked_add(SNAPSHOT_HEADER_LEN))
        .ok_or_else(|| bad(format!("grid size {n} too large")))?;
    if bytes.len() != expected {
        return Err(bad(format!("expected {expected} bytes for N = {n}, found {}", bytes.len())));
    }
    let values = bytes[SNAPSHOT_HEADER_LEN..].chunks_exact(8).map(le_f64).collect();
    FieldState::new(values, n, l, e, t).map_err(|err| bad(err.to_string()))
}

pub fn write_snapshot(path: &Path, state: &FieldState) -> Result<()> {
    fs::write(path, encode_snapshot(state)).map_err(|e| NvError::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<FieldState> {
    let bytes = fs::read(path).map_err(|e| NvError::io(path, e))?;
    decode_snapshot(&bytes, path)
}

/// Everything needed to rerun a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub command: String,
    #[serde(with = "ordered")]
    pub parameters: Vec<(String, String)>,
    pub seed: u64,
    pub tool_version: String,
    pub started_at: String,
}

mod ordered {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[(String, String)], s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: Map<String, Value> = v.iter().map(|(k, x)| (k.clone(), Value::String(x.clone()))).collect();
        m.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<(String, String)>, D::Error> {
        let m = Map::<String, Value>::deserialize(d)?;
        m.into_iter()
            .map(|(k, v)| match v {
                Value::String(s) => Ok((k, s)),
                other => Err(serde::de::Error::custom(format!("parameter {k}: expected string, got {other}"))),
            })
            .collect()
    }
}

impl ExperimentManifest {
    pub fn new(command: &str, parameters: Vec<(String, String)>, seed: u64) -> Self {
        ExperimentManifest {
            command: command.to_string(),
            parameters,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: humantime::format_rfc3339_seconds(SystemTime::now()).to_string(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.parameters.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// `<artifact>.manifest`
pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut s = artifact.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

pub fn write_manifest(path: &Path, manifest: &ExperimentManifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serialises");
    text.push('\n');
    let mut f = fs::File::create(path).map_err(|e| NvError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| NvError::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<ExperimentManifest> {
    let text = fs::read_to_string(path).map_err(|e| NvError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| NvError::Format { path: path.to_path_buf(), reason: e.to_string() })
}

/// Flat `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_config(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| NvError::Format {
            path: path.to_path_buf(),
            reason: format!("line {}: expected key=value", i + 1),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(NvError::Format { path: path.to_path_buf(), reason: format!("line {}: empty key", i + 1) });
        }
        match out.iter_mut().find(|(q, _)| q == k) {
            Some(slot) => slot.1 = v.to_string(),
            None => out.push((k.to_string(), v.to_string())),
        }
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| NvError::io(path, e))?;
    parse_config(&text, path)
}
