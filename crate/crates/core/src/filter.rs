//! Unaltered-patch filtering and generator chaining.
//!
//! A candidate is *unaltered* when its tokens equal the buggy statement's.
//! That needs no ground truth, so it can decide at inference time whether a
//! bug should fall through to the next generator.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoder::EncodedInstance;
use crate::eval::{exact_match, normalize};
use crate::generators::{checked_generate, CandidatePatch, PatchGenerator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Matches the ground truth (evaluation only).
    Correct,
    Unaltered,
    Other,
}

pub fn classify_candidate(candidate: &str, buggy: &str, ground_truth: Option<&str>) -> Verdict {
    if ground_truth.is_some_and(|t| exact_match(candidate, t)) {
        Verdict::Correct
    } else if exact_match(candidate, buggy) {
        Verdict::Unaltered
    } else {
        Verdict::Other
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Drop unaltered and duplicate candidates; when anything was dropped,
    /// top the list up from the following generators.
    #[default]
    Refill,
    /// When the first candidate is unaltered, take the next generator's
    /// list instead.
    RouteBug,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Refill => "refill",
            Policy::RouteBug => "route-bug",
        })
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "refill" => Ok(Policy::Refill),
            "route-bug" => Ok(Policy::RouteBug),
            _ => Err(format!("unknown policy `{s}` (expected refill or route-bug)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalCandidate {
    pub rank: usize,
    pub text: String,
    pub score: f64,
    pub generator: String,
    /// Rank in the generator's own list.
    pub source_rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Unaltered,
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Consulted { generator: String, returned: usize },
    Dropped { generator: String, rank: usize, reason: DropReason },
    Routed { from: String, to: String },
    Failed { generator: String, error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugOutcome {
    pub id: String,
    pub candidates: Vec<FinalCandidate>,
    pub trace: Vec<TraceEvent>,
    /// A generator failed; the bug counts as unfixed.
    pub unprocessed: bool,
}

impl BugOutcome {
    pub fn texts(&self) -> Vec<String> {
        self.candidates.iter().map(|c| c.text.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub policy: Policy,
    pub k: usize,
    pub generators: Vec<String>,
    /// Sorted by id.
    pub bugs: Vec<BugOutcome>,
}

/// Runs every instance through the generator chain. Bugs are processed in
/// parallel on the current rayon pool and returned sorted by id.
pub fn run_pipeline(
    generators: &[&dyn PatchGenerator],
    instances: &[EncodedInstance],
    k: usize,
    policy: Policy,
) -> EnsembleResult {
    assert!(!generators.is_empty(), "at least one generator");
    assert!(k >= 1, "k must be at least 1");
    let mut bugs: Vec<BugOutcome> = instances
        .par_iter()
        .map(|inst| match policy {
            Policy::Refill => refill(generators, inst, k),
            Policy::RouteBug => route_bug(generators, inst, k),
        })
        .collect();
    bugs.sort_by(|a, b| a.id.cmp(&b.id));
    EnsembleResult { policy, k, generators: generators.iter().map(|g| g.id().to_string()).collect(), bugs }
}

struct Builder<'a> {
    buggy: Vec<String>,
    seen: BTreeSet<Vec<String>>,
    out: BugOutcome,
    k: usize,
    inst: &'a EncodedInstance,
}

impl<'a> Builder<'a> {
    fn new(inst: &'a EncodedInstance, k: usize) -> Self {
        Builder {
            buggy: normalize(&inst.input.buggy_text()),
            seen: BTreeSet::new(),
            out: BugOutcome { id: inst.id.clone(), candidates: Vec::new(), trace: Vec::new(), unprocessed: false },
            k,
            inst,
        }
    }

    fn consult(&mut self, g: &dyn PatchGenerator) -> Option<Vec<CandidatePatch>> {
        match checked_generate(g, &self.out.id, &self.inst.input, self.k) {
            Ok(c) => {
                self.out.trace.push(TraceEvent::Consulted { generator: g.id().into(), returned: c.len() });
                Some(c)
            }
            Err(e) => {
                self.out.trace.push(TraceEvent::Failed { generator: g.id().into(), error: e.to_string() });
                self.out.unprocessed = true;
                self.out.candidates.clear();
                None
            }
        }
    }

    /// Appends the acceptable candidates of `cands` until the list is full;
    /// returns whether any candidate was dropped.
    fn absorb(&mut self, g: &dyn PatchGenerator, cands: Vec<CandidatePatch>) -> bool {
        let mut dropped = false;
        for c in cands {
            if self.out.candidates.len() >= self.k {
                break;
            }
            let tokens = normalize(&c.text);
            let reason = if tokens == self.buggy {
                Some(DropReason::Unaltered)
            } else if self.seen.contains(&tokens) {
                Some(DropReason::Duplicate)
            } else {
                None
            };
            if let Some(reason) = reason {
                dropped = true;
                self.out.trace.push(TraceEvent::Dropped { generator: g.id().into(), rank: c.rank, reason });
                continue;
            }
            self.seen.insert(tokens);
            self.out.candidates.push(FinalCandidate {
                rank: self.out.candidates.len() + 1,
                text: c.text,
                score: c.score,
                generator: c.generator,
                source_rank: c.rank,
            });
        }
        dropped
    }
}

fn refill(generators: &[&dyn PatchGenerator], inst: &EncodedInstance, k: usize) -> BugOutcome {
    let mut b = Builder::new(inst, k);
    let Some(first) = b.consult(generators[0]) else { return b.out };
    if !b.absorb(generators[0], first) {
        return b.out;
    }
    for pair in generators.windows(2) {
        if b.out.candidates.len() >= k {
            break;
        }
        b.out.trace.push(TraceEvent::Routed { from: pair[0].id().into(), to: pair[1].id().into() });
        let Some(more) = b.consult(pair[1]) else { return b.out };
        b.absorb(pair[1], more);
    }
    b.out
}

fn route_bug(generators: &[&dyn PatchGenerator], inst: &EncodedInstance, k: usize) -> BugOutcome {
    let mut b = Builder::new(inst, k);
    for (i, g) in generators.iter().enumerate() {
        let Some(cands) = b.consult(*g) else { return b.out };
        let first_unaltered = cands.first().is_some_and(|c| normalize(&c.text) == b.buggy);
        if first_unaltered && i + 1 < generators.len() {
            b.out.trace.push(TraceEvent::Dropped { generator: g.id().into(), rank: 1, reason: DropReason::Unaltered });
            b.out.trace.push(TraceEvent::Routed { from: g.id().into(), to: generators[i + 1].id().into() });
            continue;
        }
        b.absorb(*g, cands);
        break;
    }
    b.out
}
