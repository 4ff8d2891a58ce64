//! Atomic file output and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use fxstyle::audio::write_wav;
use fxstyle::{AudioBuffer, WavFormat};
use serde::{Deserialize, Serialize};

use crate::args::Command;

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Write via a sibling temporary file renamed into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = temp_path(path);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))
}

pub fn write_wav_atomic(path: &Path, buf: &AudioBuffer, format: WavFormat) -> Result<()> {
    let tmp = temp_path(path);
    write_wav(buf, &tmp, format).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

/// Serialize rows to CSV with a header taken from the row type.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow!("csv: {e}"))?;
    write_atomic(path, &bytes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    pub start: String,
    pub end: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: serde_json::Map<String, serde_json::Value>,
    pub tool_version: String,
    pub seed: u64,
    pub timestamps: Timestamps,
    /// Error message when the command failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub const MANIFEST_NAME: &str = "run_manifest.json";

impl RunManifest {
    pub fn new(cmd: &Command, start: String, end: String, error: Option<String>) -> Result<Self> {
        let mut arguments = match serde_json::to_value(cmd)? {
            serde_json::Value::Object(m) => m,
            _ => unreachable!("commands serialize as objects"),
        };
        arguments.remove("command");
        Ok(Self {
            command: cmd.name().to_string(),
            arguments,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cmd.seed(),
            timestamps: Timestamps { start, end },
            error,
        })
    }

    /// Rebuild the command this manifest records.
    pub fn to_command(&self) -> Result<Command> {
        let mut m = self.arguments.clone();
        m.insert("command".into(), serde_json::Value::String(self.command.clone()));
        serde_json::from_value(serde_json::Value::Object(m))
            .with_context(|| format!("manifest arguments for '{}'", self.command))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
