use std::fmt;

use serde::{Deserialize, Serialize};

use super::{normalize, EvalError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BugType {
    #[serde(rename = "Simple Delete")]
    SimpleDelete,
    #[serde(rename = "Simple Insert")]
    SimpleInsert,
    #[serde(rename = "Simple Replace")]
    SimpleReplace,
    #[serde(rename = "Mixed")]
    Mixed,
}

impl BugType {
    pub const ALL: [BugType; 4] =
        [BugType::SimpleDelete, BugType::SimpleInsert, BugType::SimpleReplace, BugType::Mixed];
}

impl fmt::Display for BugType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BugType::SimpleDelete => "Simple Delete",
            BugType::SimpleInsert => "Simple Insert",
            BugType::SimpleReplace => "Simple Replace",
            BugType::Mixed => "Mixed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Insert,
    Delete,
    Replace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditOp {
    pub kind: EditKind,
    /// Position in the buggy tokens (insertion point for inserts).
    pub at: usize,
    pub old: Option<String>,
    pub new: Option<String>,
}

/// Unit-cost token edit script minimizing (cost, inserts + deletes), so a
/// replace beats an insert/delete pair of the same cost. Among those, ops
/// sit as far left as possible.
pub fn edit_script(buggy: &[String], fixed: &[String]) -> Vec<EditOp> {
    let (n, m) = (buggy.len(), fixed.len());
    // best[i][j]: cheapest (cost, indels) turning buggy[i..] into fixed[j..]
    let mut best = vec![vec![(0usize, 0usize); m + 1]; n + 1];
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            best[i][j] = if i == n {
                (m - j, m - j)
            } else if j == m {
                (n - i, n - i)
            } else {
                let same = buggy[i] == fixed[j];
                let diag = best[i + 1][j + 1];
                let diag = if same { diag } else { (diag.0 + 1, diag.1) };
                let del = (best[i + 1][j].0 + 1, best[i + 1][j].1 + 1);
                let ins = (best[i][j + 1].0 + 1, best[i][j + 1].1 + 1);
                diag.min(del).min(ins)
            };
        }
    }
    // Walking forward and preferring an op over a match whenever both stay
    // optimal places edits leftmost.
    let mut ops = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        let here = best[i][j];
        if i < n && j < m && buggy[i] != fixed[j] && (best[i + 1][j + 1].0 + 1, best[i + 1][j + 1].1) == here {
            ops.push(EditOp {
                kind: EditKind::Replace,
                at: i,
                old: Some(buggy[i].clone()),
                new: Some(fixed[j].clone()),
            });
            i += 1;
            j += 1;
        } else if i < n && (best[i + 1][j].0 + 1, best[i + 1][j].1 + 1) == here {
            ops.push(EditOp { kind: EditKind::Delete, at: i, old: Some(buggy[i].clone()), new: None });
            i += 1;
        } else if j < m && (best[i][j + 1].0 + 1, best[i][j + 1].1 + 1) == here {
            ops.push(EditOp { kind: EditKind::Insert, at: i, old: None, new: Some(fixed[j].clone()) });
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    ops
}

/// Bug category from the kinds of ops in the minimal token edit script.
pub fn classify_bug_type(buggy: &str, fixed: &str) -> Result<BugType, EvalError> {
    let (b, f) = (normalize(buggy), normalize(fixed));
    if b == f {
        return Err(EvalError::Unchanged);
    }
    let ops = edit_script(&b, &f);
    let has = |k: EditKind| ops.iter().any(|o| o.kind == k);
    Ok(match (has(EditKind::Delete), has(EditKind::Insert), has(EditKind::Replace)) {
        (true, false, false) => BugType::SimpleDelete,
        (false, true, false) => BugType::SimpleInsert,
        (false, false, true) => BugType::SimpleReplace,
        _ => BugType::Mixed,
    })
}
