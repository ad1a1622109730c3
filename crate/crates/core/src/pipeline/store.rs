//! Stage stamps and the event log.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Stage;

pub fn file_sha256(path: &Path) -> io::Result<String> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Digest of a stage's name, parameters and input contents.
pub fn stamp_key(stage: Stage, params: &serde_json::Value, inputs: &[&Path]) -> io::Result<String> {
    let mut h = Sha256::new();
    h.update(stage.to_string().as_bytes());
    h.update([0]);
    h.update(params.to_string().as_bytes());
    for p in inputs {
        h.update([0]);
        h.update(file_sha256(p)?.as_bytes());
    }
    Ok(hex::encode(h.finalize()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stamp {
    pub stage: Stage,
    pub key: String,
    pub outputs: Vec<PathBuf>,
}

pub struct StampStore {
    dir: PathBuf,
}

impl StampStore {
    pub fn new(work_dir: &Path) -> Self {
        StampStore { dir: work_dir.join("stamps") }
    }

    fn path(&self, stage: Stage) -> PathBuf {
        self.dir.join(format!("{stage}.json"))
    }

    /// True when the recorded key matches and every output still exists.
    pub fn is_fresh(&self, stage: Stage, key: &str) -> bool {
        let Ok(text) = fs::read_to_string(self.path(stage)) else { return false };
        let Ok(stamp) = serde_json::from_str::<Stamp>(&text) else { return false };
        stamp.key == key && stamp.outputs.iter().all(|p| p.exists())
    }

    pub fn record(&self, stamp: &Stamp) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        fs::write(self.path(stamp.stage), serde_json::to_vec_pretty(stamp)?)
    }

    pub fn clear(&self, stage: Stage) {
        let _ = fs::remove_file(self.path(stage));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Started,
    Skipped,
    Completed,
    InstanceFailed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub stage: Stage,
    pub event: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Event {
    pub fn new(stage: Stage, event: EventKind) -> Self {
        Event { stage, event, id: None, count: None, elapsed_ms: None, message: None }
    }
}

/// Append-only JSONL event log.
pub struct EventLog {
    file: File,
}

impl EventLog {
    pub fn open(path: &Path) -> io::Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        Ok(EventLog { file: OpenOptions::new().create(true).append(true).open(path)? })
    }

    pub fn emit(&mut self, event: &Event) -> io::Result<()> {
        let mut line = serde_json::to_vec(event)?;
        line.push(b'\n');
        self.file.write_all(&line)
    }
}
