//! File-to-file batch pipeline: ingest and parse, build graphs, slice,
//! encode, query every backend, filter into the ensemble, evaluate.
//!
//! Each stage writes its artifacts under the work directory and a stamp
//! keyed on its parameters and input digests; a rerun skips stages whose
//! stamp still matches.

mod config;
mod stages;
mod store;

use std::collections::BTreeSet;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{Paths, PipelineConfig, BACKEND_ENV, MIN_BUDGET};
pub use stages::{
    cached_generators, encode_stage, generate_stage, generator_order, graph_stage, model_runs, parse_stage, prepare,
    slice_one, slice_stage, truth_for, CandidateRecord, ContextRecord, GraphRecord, InstanceStatus, Prepared, Stage,
    ENSEMBLE_MODEL,
};
pub use store::{file_sha256, stamp_key, Event, EventKind, EventLog, Stamp, StampStore};

use crate::corpus::{ingest, BugInstance, CorpusFormat};
use crate::encoder::EncodedInstance;
use crate::eval::{build_report, EvalReport};
use crate::filter::{run_pipeline, BugOutcome};
use crate::generators::{build_generator, BuildOptions, GeneratorKind, PatchGenerator};
use crate::jsonl::{read_jsonl, write_jsonl};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{stage} stage failed: {message}")]
    Fatal { stage: Stage, message: String },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Fatal { .. } => 1,
        }
    }

    fn fatal(stage: Stage, e: impl ToString) -> Self {
        PipelineError::Fatal { stage, message: e.to_string() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Failure {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<Stage>,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub ran: Vec<Stage>,
    pub skipped: Vec<Stage>,
    /// Instances that reached the ensemble.
    pub processed: usize,
    /// Instances dropped by some stage before generation.
    pub failed: usize,
    pub report: EvalReport,
}

/// Resolves the configuration and runs every stage. Fatal errors are also
/// written to the configured failure file.
pub fn run_all(cfg: PipelineConfig) -> Result<RunSummary, PipelineError> {
    let failure_path = cfg.path(&cfg.paths.failure);
    let _ = std::fs::remove_file(&failure_path);
    let result = cfg.resolve().and_then(|cfg| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers.unwrap_or(0))
            .build()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        pool.install(|| Runner::new(&cfg)?.run())
    });
    if let Err(e) = &result {
        let failure = Failure {
            stage: match e {
                PipelineError::Fatal { stage, .. } => Some(*stage),
                PipelineError::Config(_) => None,
            },
            message: e.to_string(),
            exit_code: e.exit_code(),
        };
        if let Some(dir) = failure_path.parent() {
            let _ = std::fs::create_dir_all(dir);
        }
        let _ = std::fs::write(&failure_path, serde_json::to_vec_pretty(&failure).unwrap_or_default());
    }
    result
}

struct Runner<'a> {
    cfg: &'a PipelineConfig,
    stamps: StampStore,
    log: EventLog,
    ran: Vec<Stage>,
    skipped: Vec<Stage>,
    failed: usize,
}

fn io_fatal(stage: Stage) -> impl Fn(io::Error) -> PipelineError {
    move |e| PipelineError::fatal(stage, e)
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a PipelineConfig) -> Result<Self, PipelineError> {
        let log = EventLog::open(&cfg.path(&cfg.paths.events))
            .map_err(|e| PipelineError::Config(format!("cannot open event log: {e}")))?;
        Ok(Runner { cfg, stamps: StampStore::new(&cfg.work_dir), log, ran: vec![], skipped: vec![], failed: 0 })
    }

    fn out(&self, p: &Path) -> PathBuf {
        self.cfg.path(p)
    }

    fn emit(&mut self, e: Event) {
        let _ = self.log.emit(&e);
    }

    fn instance_failures(&mut self, stage: Stage, statuses: &[InstanceStatus]) {
        for s in statuses.iter().filter(|s| !s.ok) {
            self.failed += 1;
            let mut e = Event::new(stage, EventKind::InstanceFailed);
            e.id = Some(s.id.clone());
            e.message = s.message.clone();
            self.emit(e);
        }
    }

    /// Runs `body` unless the stage stamp is fresh. `always` disables reuse.
    fn stage(
        &mut self,
        stage: Stage,
        params: serde_json::Value,
        inputs: &[PathBuf],
        outputs: Vec<PathBuf>,
        always: bool,
        body: impl FnOnce(&mut Self) -> Result<usize, PipelineError>,
    ) -> Result<(), PipelineError> {
        let refs: Vec<&Path> = inputs.iter().map(|p| p.as_path()).collect();
        let key = stamp_key(stage, &params, &refs).map_err(io_fatal(stage))?;
        if !always && self.stamps.is_fresh(stage, &key) {
            self.skipped.push(stage);
            self.emit(Event::new(stage, EventKind::Skipped));
            return Ok(());
        }
        self.stamps.clear(stage);
        self.emit(Event::new(stage, EventKind::Started));
        let start = Instant::now();
        match body(self) {
            Ok(count) => {
                self.stamps.record(&Stamp { stage, key, outputs }).map_err(io_fatal(stage))?;
                let mut e = Event::new(stage, EventKind::Completed);
                e.count = Some(count);
                e.elapsed_ms = Some(start.elapsed().as_millis() as u64);
                self.emit(e);
                self.ran.push(stage);
                Ok(())
            }
            Err(err) => {
                let mut e = Event::new(stage, EventKind::Failed);
                e.message = Some(err.to_string());
                self.emit(e);
                Err(err)
            }
        }
    }

    fn run(mut self) -> Result<RunSummary, PipelineError> {
        let cfg = self.cfg;
        let p = &cfg.paths;
        let (status, parsed, graphs, contexts, inputs, candidates, ensemble, report, tables) = (
            self.out(&p.parse_status),
            self.out(&p.parsed),
            self.out(&p.graphs),
            self.out(&p.contexts),
            self.out(&p.inputs),
            self.out(&p.candidates),
            self.out(&p.ensemble),
            self.out(&p.report),
            self.out(&p.tables),
        );
        if !cfg.corpus.exists() {
            return Err(PipelineError::Config(format!("corpus {} does not exist", cfg.corpus.display())));
        }

        self.stage(
            Stage::Parse,
            serde_json::json!({}),
            std::slice::from_ref(&cfg.corpus),
            vec![status.clone(), parsed.clone()],
            false,
            |r| {
                let ingested = ingest(&cfg.corpus, CorpusFormat::Jsonl).map_err(io_fatal(Stage::Parse))?;
                let (ok, statuses) = parse_stage(&ingested);
                write_jsonl(&status, &statuses).map_err(io_fatal(Stage::Parse))?;
                write_jsonl(&parsed, &ok).map_err(io_fatal(Stage::Parse))?;
                r.instance_failures(Stage::Parse, &statuses);
                Ok(ok.len())
            },
        )?;

        self.stage(
            Stage::Graph,
            serde_json::json!({}),
            std::slice::from_ref(&parsed),
            vec![graphs.clone()],
            false,
            |r| {
                let instances: Vec<BugInstance> = read_jsonl(&parsed).map_err(io_fatal(Stage::Graph))?;
                let (ok, failed) = graph_stage(&instances);
                write_jsonl(&graphs, &ok).map_err(io_fatal(Stage::Graph))?;
                r.instance_failures(Stage::Graph, &failed);
                Ok(ok.len())
            },
        )?;

        self.stage(
            Stage::Slice,
            serde_json::json!({}),
            &[parsed.clone(), graphs.clone()],
            vec![contexts.clone()],
            false,
            |r| {
                let instances: Vec<BugInstance> = read_jsonl(&parsed).map_err(io_fatal(Stage::Slice))?;
                let g: Vec<GraphRecord> = read_jsonl(&graphs).map_err(io_fatal(Stage::Slice))?;
                let (ok, failed) = slice_stage(&instances, &g);
                write_jsonl(&contexts, &ok).map_err(io_fatal(Stage::Slice))?;
                r.instance_failures(Stage::Slice, &failed);
                Ok(ok.len())
            },
        )?;

        let budget = cfg.budget;
        self.stage(
            Stage::Encode,
            serde_json::json!({ "budget": budget }),
            std::slice::from_ref(&contexts),
            vec![inputs.clone()],
            false,
            |r| {
                let c: Vec<ContextRecord> = read_jsonl(&contexts).map_err(io_fatal(Stage::Encode))?;
                let (ok, failed) = encode_stage(&c, budget);
                write_jsonl(&inputs, &ok).map_err(io_fatal(Stage::Encode))?;
                r.instance_failures(Stage::Encode, &failed);
                Ok(ok.len())
            },
        )?;

        let labels: Vec<String> = cfg.backends.iter().map(|s| s.label()).collect();
        let unique: BTreeSet<&String> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(PipelineError::Config(format!("backend labels must be unique: {}", labels.join(", "))));
        }
        let mut gen_inputs = vec![inputs.clone()];
        for spec in &cfg.backends {
            if let GeneratorKind::Replay(path) = &spec.kind {
                if !path.exists() {
                    return Err(PipelineError::Config(format!("replay file {} does not exist", path.display())));
                }
                gen_inputs.push(path.clone());
            }
        }
        let nondeterministic = cfg.seed.is_none() && cfg.backends.iter().any(|s| s.is_external());
        let gen_params = serde_json::json!({
            "backends": cfg.backends.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "k": cfg.k,
            "seed": cfg.seed,
            "timeout_secs": cfg.timeout_secs,
        });
        self.stage(Stage::Generate, gen_params, &gen_inputs, vec![candidates.clone()], nondeterministic, |r| {
            let encoded: Vec<EncodedInstance> = read_jsonl(&inputs).map_err(io_fatal(Stage::Generate))?;
            let opts = BuildOptions { seed: cfg.seed, timeout: std::time::Duration::from_secs(cfg.timeout_secs) };
            let mut records = Vec::new();
            for spec in &cfg.backends {
                let g = build_generator(spec, &opts).map_err(|e| PipelineError::Config(e.to_string()))?;
                let out = generate_stage(g.as_ref(), &encoded, cfg.k);
                for rec in out.iter().filter(|rec| rec.error.is_some()) {
                    let mut e = Event::new(Stage::Generate, EventKind::InstanceFailed);
                    e.id = Some(rec.id.clone());
                    e.message = rec.error.as_ref().map(|x| format!("{}: {x}", rec.generator));
                    r.emit(e);
                }
                records.extend(out);
            }
            write_jsonl(&candidates, &records).map_err(io_fatal(Stage::Generate))?;
            Ok(records.len())
        })?;

        let filter_params = serde_json::json!({ "policy": cfg.policy, "k": cfg.k, "backends": labels });
        self.stage(
            Stage::Filter,
            filter_params,
            &[inputs.clone(), candidates.clone()],
            vec![ensemble.clone()],
            false,
            |_| {
                let encoded: Vec<EncodedInstance> = read_jsonl(&inputs).map_err(io_fatal(Stage::Filter))?;
                let records: Vec<CandidateRecord> = read_jsonl(&candidates).map_err(io_fatal(Stage::Filter))?;
                let cached = cached_generators(&records, &labels);
                let refs: Vec<&dyn PatchGenerator> = cached.iter().map(|g| g as &dyn PatchGenerator).collect();
                let result = run_pipeline(&refs, &encoded, cfg.k, cfg.policy);
                write_jsonl(&ensemble, &result.bugs).map_err(io_fatal(Stage::Filter))?;
                Ok(result.bugs.len())
            },
        )?;

        let eval_params = serde_json::json!({ "report_k": cfg.report_k, "match_mode": cfg.match_mode });
        let eval_inputs = [parsed.clone(), ensemble.clone(), candidates.clone()];
        self.stage(Stage::Eval, eval_params, &eval_inputs, vec![report.clone(), tables.clone()], false, |_| {
            let rep = evaluate_files(&parsed, &ensemble, &candidates, cfg)?;
            write_report(&rep, &report, &tables).map_err(io_fatal(Stage::Eval))?;
            Ok(rep.bugs)
        })?;

        let text = std::fs::read_to_string(&report).map_err(io_fatal(Stage::Eval))?;
        let report: EvalReport = serde_json::from_str(&text).map_err(|e| PipelineError::fatal(Stage::Eval, e))?;
        Ok(RunSummary { ran: self.ran, skipped: self.skipped, processed: report.bugs, failed: self.failed, report })
    }
}

fn evaluate_files(
    parsed: &Path,
    ensemble: &Path,
    candidates: &Path,
    cfg: &PipelineConfig,
) -> Result<EvalReport, PipelineError> {
    let corpus: Vec<BugInstance> = read_jsonl(parsed).map_err(io_fatal(Stage::Eval))?;
    let outcomes: Vec<BugOutcome> = read_jsonl(ensemble).map_err(io_fatal(Stage::Eval))?;
    let records: Vec<CandidateRecord> = read_jsonl(candidates).map_err(io_fatal(Stage::Eval))?;
    let truth = truth_for(&corpus, &outcomes);
    let runs = model_runs(&outcomes, &records);
    build_report(&runs, &truth, cfg.report_k, cfg.match_mode).map_err(|e| PipelineError::fatal(Stage::Eval, e))
}

/// Pretty JSON plus the markdown tables.
pub fn write_report(report: &EvalReport, json: &Path, markdown: &Path) -> io::Result<()> {
    for p in [json, markdown] {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(json, text)?;
    std::fs::write(markdown, report.to_markdown())
}
