use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    classify_bug_type, first_correct_rank, fix_table, overlap_matrix, BugType, EvalError, FixAtK, MatchMode, Overlap,
};

/// Ground truth for one bug.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truth {
    pub buggy: String,
    pub fixed: String,
}

/// One model's ranked candidate texts per bug.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelRun {
    pub name: String,
    pub lists: BTreeMap<String, Vec<String>>,
    pub unprocessed: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub name: String,
    /// Bugs with a correct candidate within the top K, sorted.
    pub correct: Vec<String>,
    pub fix_at_k: Vec<FixAtK>,
    pub bug_types: BTreeMap<BugType, usize>,
    pub unprocessed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub k: usize,
    pub match_mode: MatchMode,
    pub bugs: usize,
    pub corpus_bug_types: BTreeMap<BugType, usize>,
    pub models: Vec<ModelReport>,
    pub overlap: Overlap,
}

fn empty_type_counts() -> BTreeMap<BugType, usize> {
    BugType::ALL.iter().map(|&t| (t, 0)).collect()
}

/// Scores every run against `truth`. The bugs evaluated are the keys of
/// `truth`; a bug a run has no list for counts as unfixed.
pub fn build_report(
    runs: &[ModelRun],
    truth: &BTreeMap<String, Truth>,
    k: usize,
    mode: MatchMode,
) -> Result<EvalReport, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    let mut types = BTreeMap::new();
    for (id, t) in truth {
        let ty = classify_bug_type(&t.buggy, &t.fixed).map_err(|e| EvalError::Bug(id.clone(), Box::new(e)))?;
        types.insert(id.as_str(), ty);
    }
    let mut corpus_bug_types = empty_type_counts();
    for ty in types.values() {
        *corpus_bug_types.entry(*ty).or_default() += 1;
    }

    let mut models = Vec::with_capacity(runs.len());
    let mut sets = Vec::with_capacity(runs.len());
    for run in runs {
        let ranks: BTreeMap<String, Option<usize>> = truth
            .iter()
            .map(|(id, t)| {
                let rank = run.lists.get(id).and_then(|c| first_correct_rank(c, &t.fixed, mode));
                (id.clone(), rank)
            })
            .collect();
        let correct: BTreeSet<String> =
            ranks.iter().filter(|(_, r)| r.is_some_and(|r| r <= k)).map(|(id, _)| id.clone()).collect();
        let mut bug_types = empty_type_counts();
        for id in &correct {
            *bug_types.entry(types[id.as_str()]).or_default() += 1;
        }
        models.push(ModelReport {
            name: run.name.clone(),
            correct: correct.iter().cloned().collect(),
            fix_at_k: fix_table(&ranks, k),
            bug_types,
            unprocessed: run.unprocessed.iter().filter(|id| truth.contains_key(*id)).count(),
        });
        sets.push((run.name.clone(), correct));
    }
    let overlap = overlap_matrix(&sets)?;
    Ok(EvalReport { k, match_mode: mode, bugs: truth.len(), corpus_bug_types, models, overlap })
}

fn pct(x: f64) -> String {
    format!("{:.2}%", x * 100.0)
}

impl EvalReport {
    /// Markdown tables: Fix@k per model, correct patches by bug type, and
    /// the pairwise overlap matrix with unique-fix counts.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# Evaluation report\n");
        let _ = writeln!(out, "Bugs: {}. Match mode: {}. K = {}.\n", self.bugs, self.match_mode, self.k);

        let _ = writeln!(out, "## Fix@k\n");
        let header: Vec<String> = (1..=self.k).map(|k| format!("Fix@{k}")).collect();
        let _ = writeln!(out, "| Model | {} | Unprocessed |", header.join(" | "));
        let _ = writeln!(out, "|---|{}---|", "---|".repeat(self.k));
        for m in &self.models {
            let cells: Vec<String> = m.fix_at_k.iter().map(|f| format!("{} ({})", f.fixed, pct(f.rate))).collect();
            let _ = writeln!(out, "| {} | {} | {} |", m.name, cells.join(" | "), m.unprocessed);
        }

        let _ = writeln!(out, "\n## Correct patches by bug type\n");
        let names: Vec<&str> = self.models.iter().map(|m| m.name.as_str()).collect();
        let _ = writeln!(out, "| Bug type | Corpus | {} |", names.join(" | "));
        let _ = writeln!(out, "|---|---|{}", "---|".repeat(names.len()));
        for ty in BugType::ALL {
            let cells: Vec<String> =
                self.models.iter().map(|m| m.bug_types.get(&ty).copied().unwrap_or(0).to_string()).collect();
            let total = self.corpus_bug_types.get(&ty).copied().unwrap_or(0);
            let _ = writeln!(out, "| {ty} | {total} | {} |", cells.join(" | "));
        }

        let _ = writeln!(out, "\n## Overlap of correct patches\n");
        let _ = writeln!(out, "Row i, column j: share of row i's correct patches also produced by j.\n");
        let _ = writeln!(out, "| | {} | Correct | Unique |", self.overlap.models.join(" | "));
        let _ = writeln!(out, "|---|{}---|---|", "---|".repeat(self.overlap.models.len()));
        for (i, name) in self.overlap.models.iter().enumerate() {
            let cells: Vec<String> = self.overlap.ratio[i].iter().map(|&r| pct(r)).collect();
            let _ = writeln!(
                out,
                "| {name} | {} | {} | {} |",
                cells.join(" | "),
                self.overlap.correct[i],
                self.overlap.unique[i]
            );
        }
        out
    }
}
