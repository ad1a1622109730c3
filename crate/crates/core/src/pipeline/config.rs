use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::encoder::DEFAULT_BUDGET;
use crate::eval::{MatchMode, DEFAULT_REPORT_K};
use crate::filter::Policy;
use crate::generators::{parse_spec_list, GeneratorKind, GeneratorSpec, DEFAULT_K};

pub const BACKEND_ENV: &str = "SLICEFIX_BACKEND";
pub const MIN_BUDGET: usize = 16;

/// Artifact locations; relative paths resolve against the work directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub parse_status: PathBuf,
    pub parsed: PathBuf,
    pub graphs: PathBuf,
    pub contexts: PathBuf,
    pub inputs: PathBuf,
    pub candidates: PathBuf,
    pub ensemble: PathBuf,
    pub report: PathBuf,
    pub tables: PathBuf,
    pub events: PathBuf,
    pub failure: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            parse_status: "parse_status.jsonl".into(),
            parsed: "parsed.jsonl".into(),
            graphs: "graphs.jsonl".into(),
            contexts: "contexts.jsonl".into(),
            inputs: "inputs.jsonl".into(),
            candidates: "candidates.jsonl".into(),
            ensemble: "ensemble.jsonl".into(),
            report: "report.json".into(),
            tables: "report.md".into(),
            events: "events.jsonl".into(),
            failure: "failure.json".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub work_dir: PathBuf,
    pub k: usize,
    pub budget: usize,
    pub policy: Policy,
    /// Ordered generator chain. Empty means the `SLICEFIX_BACKEND` value.
    pub backends: Vec<GeneratorSpec>,
    /// Decoding seed forwarded to external backends.
    pub seed: Option<u64>,
    pub match_mode: MatchMode,
    /// Largest k in the report's Fix@k table.
    pub report_k: usize,
    /// Per-bug worker threads; `None` uses every core.
    pub workers: Option<usize>,
    pub timeout_secs: u64,
    pub paths: Paths,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: "corpus.jsonl".into(),
            work_dir: "slicefix-out".into(),
            k: DEFAULT_K,
            budget: DEFAULT_BUDGET,
            policy: Policy::Refill,
            backends: Vec::new(),
            seed: None,
            match_mode: MatchMode::Token,
            report_k: DEFAULT_REPORT_K,
            workers: None,
            timeout_secs: crate::generators::DEFAULT_TIMEOUT.as_secs(),
            paths: Paths::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Reads a TOML file; relative `corpus`, `work_dir` and replay table
    /// paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            cfg.corpus = base.join(&cfg.corpus);
            cfg.work_dir = base.join(&cfg.work_dir);
            for spec in &mut cfg.backends {
                if let GeneratorKind::Replay(p) = &mut spec.kind {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// Fills in the backend from the environment and checks the ranges.
    pub fn resolve(mut self) -> Result<Self, PipelineError> {
        if self.backends.is_empty() {
            if let Ok(v) = std::env::var(BACKEND_ENV) {
                self.backends =
                    parse_spec_list(&v).map_err(|e| PipelineError::Config(format!("{BACKEND_ENV}: {e}")))?;
            }
        }
        if self.backends.is_empty() {
            return Err(PipelineError::Config(format!("no backends configured and {BACKEND_ENV} is unset")));
        }
        if self.k == 0 {
            return Err(PipelineError::Config("k must be at least 1".into()));
        }
        if self.report_k == 0 {
            return Err(PipelineError::Config("report_k must be at least 1".into()));
        }
        if self.budget < MIN_BUDGET {
            return Err(PipelineError::Config(format!("budget must be at least {MIN_BUDGET}")));
        }
        if self.workers == Some(0) {
            return Err(PipelineError::Config("workers must be at least 1".into()));
        }
        Ok(self)
    }

    pub fn path(&self, p: &Path) -> PathBuf {
        self.work_dir.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_with_defaults() {
        let cfg = PipelineConfig::from_toml(
            "corpus = \"c.jsonl\"\nbackends = [\"identity\", \"replay:t.json\"]\npolicy = \"route-bug\"\n[paths]\nreport = \"out/r.json\"\n",
        )
        .unwrap();
        assert_eq!(cfg.k, 10);
        assert_eq!(cfg.budget, 512);
        assert_eq!(cfg.policy, Policy::RouteBug);
        assert_eq!(cfg.backends[1].kind, GeneratorKind::Replay("t.json".into()));
        assert_eq!(cfg.paths.report, PathBuf::from("out/r.json"));
        assert_eq!(cfg.paths.inputs, PathBuf::from("inputs.jsonl"));
    }

    #[test]
    fn invalid_configs() {
        assert!(matches!(PipelineConfig::from_toml("kk = 3"), Err(PipelineError::Config(_))));
        assert!(matches!(PipelineConfig::from_toml("backends = [\"nope\"]"), Err(PipelineError::Config(_))));
        let base = PipelineConfig { backends: vec!["identity".parse().unwrap()], ..Default::default() };
        assert!(PipelineConfig { budget: 15, ..base.clone() }.resolve().is_err());
        assert!(PipelineConfig { k: 0, ..base.clone() }.resolve().is_err());
        assert!(base.resolve().is_ok());
    }

    #[test]
    fn load_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "backends = [\"replay:t.json\", \"identity\"]\nwork_dir = \"w\"\n").unwrap();
        let cfg = PipelineConfig::load(&path).unwrap();
        assert_eq!(cfg.work_dir, dir.path().join("w"));
        assert_eq!(cfg.corpus, dir.path().join("corpus.jsonl"));
        assert_eq!(cfg.backends[0].kind, GeneratorKind::Replay(dir.path().join("t.json")));
    }
}
