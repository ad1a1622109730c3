//! Exact-match assessment, Fix@k, bug-type classification, overlap analysis
//! and the evaluation report.

mod bugtype;
mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bugtype::{classify_bug_type, edit_script, BugType, EditKind, EditOp};
pub use report::{build_report, EvalReport, ModelReport, ModelRun, Truth};

use crate::java::token_texts;

pub const DEFAULT_REPORT_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("buggy and fixed lines are identical after normalization")]
    Unchanged,
    #[error("overlap needs at least one model")]
    NoModels,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("bug {0}: {1}")]
    Bug(String, Box<EvalError>),
}

/// Lexical tokens of one line; whitespace is not significant, case is.
pub fn normalize(text: &str) -> Vec<String> {
    token_texts(text)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    /// Equal token sequences.
    #[default]
    Token,
    /// Equal text after trimming the ends.
    Raw,
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchMode::Token => "token",
            MatchMode::Raw => "raw",
        })
    }
}

impl FromStr for MatchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "token" => Ok(MatchMode::Token),
            "raw" => Ok(MatchMode::Raw),
            _ => Err(format!("unknown match mode `{s}` (expected token or raw)")),
        }
    }
}

pub fn exact_match(candidate: &str, ground_truth: &str) -> bool {
    matches(candidate, ground_truth, MatchMode::Token)
}

pub fn matches(candidate: &str, ground_truth: &str, mode: MatchMode) -> bool {
    match mode {
        MatchMode::Token => normalize(candidate) == normalize(ground_truth),
        MatchMode::Raw => candidate.trim() == ground_truth.trim(),
    }
}

/// 1-based rank of the first candidate matching `truth`.
pub fn first_correct_rank<S: AsRef<str>>(candidates: &[S], truth: &str, mode: MatchMode) -> Option<usize> {
    candidates.iter().position(|c| matches(c.as_ref(), truth, mode)).map(|p| p + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixAtK {
    pub k: usize,
    pub fixed: usize,
    pub total: usize,
    pub rate: f64,
}

/// Share of bugs whose first correct rank is at most `k`; bugs mapped to
/// `None` count as unfixed.
pub fn fix_at_k(ranks: &BTreeMap<String, Option<usize>>, k: usize) -> f64 {
    if ranks.is_empty() {
        return 0.0;
    }
    fixed_within(ranks, k) as f64 / ranks.len() as f64
}

fn fixed_within(ranks: &BTreeMap<String, Option<usize>>, k: usize) -> usize {
    ranks.values().filter(|r| r.is_some_and(|r| r <= k)).count()
}

pub fn fix_table(ranks: &BTreeMap<String, Option<usize>>, k_max: usize) -> Vec<FixAtK> {
    (1..=k_max)
        .map(|k| FixAtK { k, fixed: fixed_within(ranks, k), total: ranks.len(), rate: fix_at_k(ranks, k) })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub models: Vec<String>,
    /// `ratio[i][j]` = |CPi ∩ CPj| / |CPi|, 0 when CPi is empty.
    pub ratio: Vec<Vec<f64>>,
    /// Bugs fixed by model i and no other.
    pub unique: Vec<usize>,
    pub correct: Vec<usize>,
}

pub fn overlap_matrix(sets: &[(String, BTreeSet<String>)]) -> Result<Overlap, EvalError> {
    if sets.is_empty() {
        return Err(EvalError::NoModels);
    }
    let ratio = sets
        .iter()
        .map(|(_, a)| {
            sets.iter()
                .map(|(_, b)| if a.is_empty() { 0.0 } else { a.intersection(b).count() as f64 / a.len() as f64 })
                .collect()
        })
        .collect();
    let unique = sets
        .iter()
        .enumerate()
        .map(|(i, (_, a))| {
            a.iter().filter(|id| !sets.iter().enumerate().any(|(j, (_, b))| j != i && b.contains(*id))).count()
        })
        .collect();
    Ok(Overlap {
        models: sets.iter().map(|(n, _)| n.clone()).collect(),
        ratio,
        unique,
        correct: sets.iter().map(|(_, s)| s.len()).collect(),
    })
}
