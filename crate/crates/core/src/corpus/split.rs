use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::BugInstance;

/// Allowed deviation of an achieved share from its ratio.
pub const SHARE_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("empty corpus")]
    Empty,
    #[error("ratios must be non-negative and sum to 1, got {0:?}")]
    BadRatios([f64; 3]),
    #[error("{repos} repositories cannot fill {splits} non-empty splits without leakage")]
    TooFewRepos { repos: usize, splits: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSplit {
    pub train: Vec<String>,
    pub valid: Vec<String>,
    pub test: Vec<String>,
    pub ratios: [f64; 3],
    pub seed: u64,
    /// Repositories per split, sorted.
    pub repos: [Vec<String>; 3],
    /// Achieved instance shares.
    pub shares: [f64; 3],
    /// Every share within [`SHARE_TOLERANCE`] of its ratio.
    pub within_tolerance: bool,
}

impl CorpusSplit {
    pub fn parts(&self) -> [&[String]; 3] {
        [&self.train, &self.valid, &self.test]
    }
}

/// Shuffles repositories with `seed`, orders them largest first (stable, so
/// the shuffle breaks size ties), and gives each to the split furthest below
/// its target instance count; ties go to the earlier split. Once the repos
/// left only just cover the still-empty splits, they go to those.
pub fn split_by_repo(corpus: &[BugInstance], ratios: [f64; 3], seed: u64) -> Result<CorpusSplit, SplitError> {
    if corpus.is_empty() {
        return Err(SplitError::Empty);
    }
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(SplitError::BadRatios(ratios));
    }
    let mut by_repo: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for inst in corpus {
        by_repo.entry(&inst.repo).or_default().push(&inst.id);
    }
    let active: Vec<usize> = (0..3).filter(|&i| ratios[i] > 0.0).collect();
    if by_repo.len() < active.len() {
        return Err(SplitError::TooFewRepos { repos: by_repo.len(), splits: active.len() });
    }

    let mut repos: Vec<(&str, Vec<&str>)> = by_repo.into_iter().collect();
    repos.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    repos.sort_by_key(|r| std::cmp::Reverse(r.1.len()));

    let total = corpus.len() as f64;
    let mut counts = [0usize; 3];
    let mut ids: [Vec<String>; 3] = Default::default();
    let mut repo_names: [Vec<String>; 3] = Default::default();
    let remaining = repos.len();
    for (k, (repo, members)) in repos.into_iter().enumerate() {
        let deficit = |i: usize| ratios[i] * total - counts[i] as f64;
        let empty: Vec<usize> = active.iter().copied().filter(|&i| repo_names[i].is_empty()).collect();
        let candidates = if remaining - k <= empty.len() { &empty } else { &active };
        let mut best = candidates[0];
        for &i in &candidates[1..] {
            if deficit(i) > deficit(best) {
                best = i;
            }
        }
        counts[best] += members.len();
        ids[best].extend(members.iter().map(|s| s.to_string()));
        repo_names[best].push(repo.to_string());
    }
    for v in ids.iter_mut().chain(repo_names.iter_mut()) {
        v.sort();
    }
    let shares = counts.map(|c| c as f64 / total);
    let within_tolerance = (0..3).all(|i| (shares[i] - ratios[i]).abs() <= SHARE_TOLERANCE + 1e-12);
    let [train, valid, test] = ids;
    Ok(CorpusSplit { train, valid, test, ratios, seed, repos: repo_names, shares, within_tolerance })
}
