//! Bug-fixing pair records: on-disk format, validation, and repository-disjoint
//! splitting.

mod split;

use std::collections::BTreeSet;
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use split::{split_by_repo, CorpusSplit, SplitError, SHARE_TOLERANCE};

use crate::eval::normalize;
use crate::java::normalize_method_text;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Benchmark {
    Bfp,
    BugsJar,
    Defects4J,
    Bears,
    QuixBugs,
    Other(String),
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Benchmark::Bfp => "BFP",
            Benchmark::BugsJar => "Bugs.jar",
            Benchmark::Defects4J => "Defects4J",
            Benchmark::Bears => "Bears",
            Benchmark::QuixBugs => "QuixBugs",
            Benchmark::Other(s) => s,
        })
    }
}

impl From<String> for Benchmark {
    fn from(s: String) -> Self {
        match s.as_str() {
            "BFP" => Benchmark::Bfp,
            "Bugs.jar" => Benchmark::BugsJar,
            "Defects4J" => Benchmark::Defects4J,
            "Bears" => Benchmark::Bears,
            "QuixBugs" => Benchmark::QuixBugs,
            _ => Benchmark::Other(s),
        }
    }
}

impl From<Benchmark> for String {
    fn from(b: Benchmark) -> String {
        b.to_string()
    }
}

/// One single-line bug and its human-written fix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugInstance {
    pub id: String,
    pub repo: String,
    #[serde(default)]
    pub class_source: Option<String>,
    pub method_source: String,
    /// 0-based line of the normalized method text.
    pub buggy_line: usize,
    pub fixed_line: String,
    pub benchmark: Benchmark,
}

impl BugInstance {
    pub fn normalized_lines(&self) -> Vec<String> {
        normalize_method_text(&self.method_source).lines().map(str::to_string).collect()
    }

    /// The buggy line of the normalized method, if in range.
    pub fn buggy_text(&self) -> Option<String> {
        self.normalized_lines().into_iter().nth(self.buggy_line)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            _ => Err(format!("unsupported corpus format `{s}` (expected jsonl)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RejectReason {
    Malformed { message: String },
    EmptyId,
    DuplicateId,
    LineOutOfRange { buggy_line: usize, lines: usize },
    NoChange,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::Malformed { message } => write!(f, "malformed record: {message}"),
            RejectReason::EmptyId => f.write_str("empty id"),
            RejectReason::DuplicateId => f.write_str("duplicate id"),
            RejectReason::LineOutOfRange { buggy_line, lines } => {
                write!(f, "buggy_line {buggy_line} outside a {lines}-line method")
            }
            RejectReason::NoChange => f.write_str("fixed line equals buggy line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line of the corpus file.
    pub record: usize,
    pub id: Option<String>,
    #[serde(flatten)]
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ingested {
    pub instances: Vec<BugInstance>,
    pub rejected: Vec<Rejection>,
}

pub fn ingest(path: &Path, format: CorpusFormat) -> io::Result<Ingested> {
    match format {
        CorpusFormat::Jsonl => Ok(ingest_jsonl(&std::fs::read_to_string(path)?)),
    }
}

/// Accepts records whose buggy line exists and differs from the fix; every
/// other record becomes a [`Rejection`]. Record order is preserved.
pub fn ingest_jsonl(text: &str) -> Ingested {
    let mut out = Ingested::default();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = i + 1;
        let inst: BugInstance = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(|x| x.as_str()).map(str::to_string));
                out.rejected.push(Rejection { record, id, reason: RejectReason::Malformed { message: e.to_string() } });
                continue;
            }
        };
        match validate(&inst, &seen) {
            Ok(()) => {
                seen.insert(inst.id.clone());
                out.instances.push(inst);
            }
            Err(reason) => out.rejected.push(Rejection { record, id: Some(inst.id), reason }),
        }
    }
    out
}

fn validate(inst: &BugInstance, seen: &BTreeSet<String>) -> Result<(), RejectReason> {
    if inst.id.trim().is_empty() {
        return Err(RejectReason::EmptyId);
    }
    if seen.contains(&inst.id) {
        return Err(RejectReason::DuplicateId);
    }
    let lines = inst.normalized_lines();
    let Some(buggy) = lines.get(inst.buggy_line) else {
        return Err(RejectReason::LineOutOfRange { buggy_line: inst.buggy_line, lines: lines.len() });
    };
    if normalize(buggy) == normalize(&inst.fixed_line) {
        return Err(RejectReason::NoChange);
    }
    Ok(())
}
