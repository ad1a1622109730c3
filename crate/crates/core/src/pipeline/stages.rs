//! Per-instance stage functions and the records they persist.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{BugInstance, Ingested};
use crate::depgraph::{build_pdg, Pdg};
use crate::encoder::{encode_input, EncodedInstance};
use crate::eval::{ModelRun, Truth};
use crate::filter::BugOutcome;
use crate::generators::{checked_generate, CachedGenerator, CandidatePatch, GeneratorError, PatchGenerator};
use crate::java::{extract_class_context, parse_method, ClassContext, MethodAst, StatementId};
use crate::slicer::{extract_dependency_context, SliceContext};

/// Name the ensemble gets in evaluation reports.
pub const ENSEMBLE_MODEL: &str = "ensemble";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Parse,
    Graph,
    Slice,
    Encode,
    Generate,
    Filter,
    Eval,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Parse,
        Stage::Graph,
        Stage::Slice,
        Stage::Encode,
        Stage::Generate,
        Stage::Filter,
        Stage::Eval,
    ];
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

/// Outcome of one instance in one stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceStatus {
    pub id: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<Stage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl InstanceStatus {
    pub fn ok(id: &str) -> Self {
        InstanceStatus { id: id.into(), ok: true, stage: None, line: None, message: None }
    }

    pub fn failed(id: &str, stage: Stage, line: Option<usize>, message: impl Into<String>) -> Self {
        InstanceStatus { id: id.into(), ok: false, stage: Some(stage), line, message: Some(message.into()) }
    }
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub method: MethodAst,
    pub class: ClassContext,
    pub buggy: StatementId,
}

/// Parses the method and class and locates the buggy statement.
pub fn prepare(inst: &BugInstance) -> Result<Prepared, InstanceStatus> {
    let method = parse_method(&inst.method_source)
        .map_err(|e| InstanceStatus::failed(&inst.id, Stage::Parse, Some(e.line), format!("method: {}", e.message)))?;
    let buggy = method.statement_at_line(inst.buggy_line).map(|s| s.id).ok_or_else(|| {
        InstanceStatus::failed(&inst.id, Stage::Parse, Some(inst.buggy_line), "buggy line is not a statement")
    })?;
    let class = extract_class_context(inst.class_source.as_deref(), &method.name)
        .map_err(|e| InstanceStatus::failed(&inst.id, Stage::Parse, Some(e.line), format!("class: {}", e.message)))?;
    Ok(Prepared { method, class, buggy })
}

/// Ingest rejections plus parse results, in corpus order; returns the
/// instances that parsed.
pub fn parse_stage(ingested: &Ingested) -> (Vec<BugInstance>, Vec<InstanceStatus>) {
    let mut statuses: Vec<InstanceStatus> = ingested
        .rejected
        .iter()
        .map(|r| {
            let id = r.id.clone().unwrap_or_else(|| format!("record:{}", r.record));
            InstanceStatus::failed(&id, Stage::Ingest, Some(r.record), r.reason.to_string())
        })
        .collect();
    let results: Vec<Result<(), InstanceStatus>> =
        ingested.instances.par_iter().map(|inst| prepare(inst).map(|_| ())).collect();
    let mut parsed = Vec::new();
    for (inst, r) in ingested.instances.iter().zip(results) {
        match r {
            Ok(()) => {
                statuses.push(InstanceStatus::ok(&inst.id));
                parsed.push(inst.clone());
            }
            Err(s) => statuses.push(s),
        }
    }
    (parsed, statuses)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub id: String,
    pub pdg: Pdg,
}

pub fn graph_stage(parsed: &[BugInstance]) -> (Vec<GraphRecord>, Vec<InstanceStatus>) {
    let results: Vec<Result<GraphRecord, InstanceStatus>> = parsed
        .par_iter()
        .map(|inst| {
            let p = prepare(inst)?;
            let pdg = build_pdg(&p.method)
                .map_err(|e| InstanceStatus::failed(&inst.id, Stage::Graph, None, e.to_string()))?;
            Ok(GraphRecord { id: inst.id.clone(), pdg })
        })
        .collect();
    split_results(results)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextRecord {
    pub id: String,
    pub context: SliceContext,
}

pub fn slice_one(inst: &BugInstance, pdg: &Pdg) -> Result<SliceContext, InstanceStatus> {
    let p = prepare(inst)?;
    extract_dependency_context(pdg, &p.method, &p.class, p.buggy)
        .map_err(|e| InstanceStatus::failed(&inst.id, Stage::Slice, Some(inst.buggy_line), e.to_string()))
}

/// Slices every parsed instance that has a graph.
pub fn slice_stage(parsed: &[BugInstance], graphs: &[GraphRecord]) -> (Vec<ContextRecord>, Vec<InstanceStatus>) {
    let by_id: BTreeMap<&str, &Pdg> = graphs.iter().map(|g| (g.id.as_str(), &g.pdg)).collect();
    let results: Vec<Result<ContextRecord, InstanceStatus>> = parsed
        .par_iter()
        .filter_map(|inst| by_id.get(inst.id.as_str()).map(|pdg| (inst, *pdg)))
        .map(|(inst, pdg)| Ok(ContextRecord { id: inst.id.clone(), context: slice_one(inst, pdg)? }))
        .collect();
    split_results(results)
}

pub fn encode_stage(contexts: &[ContextRecord], budget: usize) -> (Vec<EncodedInstance>, Vec<InstanceStatus>) {
    let results: Vec<Result<EncodedInstance, InstanceStatus>> = contexts
        .par_iter()
        .map(|c| {
            encode_input(&c.context, budget)
                .map(|input| EncodedInstance { id: c.id.clone(), input })
                .map_err(|e| InstanceStatus::failed(&c.id, Stage::Encode, None, e.to_string()))
        })
        .collect();
    split_results(results)
}

fn split_results<T>(results: Vec<Result<T, InstanceStatus>>) -> (Vec<T>, Vec<InstanceStatus>) {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(s) => failed.push(s),
        }
    }
    (ok, failed)
}

/// One generator's response for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub id: String,
    pub generator: String,
    pub candidates: Vec<CandidatePatch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<GeneratorError>,
}

/// Queries `g` for every instance; records are in input order.
pub fn generate_stage(g: &dyn PatchGenerator, inputs: &[EncodedInstance], k: usize) -> Vec<CandidateRecord> {
    inputs
        .par_iter()
        .map(|inst| match checked_generate(g, &inst.id, &inst.input, k) {
            Ok(candidates) => {
                CandidateRecord { id: inst.id.clone(), generator: g.id().into(), candidates, error: None }
            }
            Err(e) => {
                CandidateRecord { id: inst.id.clone(), generator: g.id().into(), candidates: vec![], error: Some(e) }
            }
        })
        .collect()
}

/// Replays recorded responses, one generator per label in `order`.
pub fn cached_generators(records: &[CandidateRecord], order: &[String]) -> Vec<CachedGenerator> {
    order
        .iter()
        .map(|label| {
            let responses = records
                .iter()
                .filter(|r| &r.generator == label)
                .map(|r| {
                    let resp = match &r.error {
                        Some(e) => Err(e.clone()),
                        None => Ok(r.candidates.clone()),
                    };
                    (r.id.clone(), resp)
                })
                .collect();
            CachedGenerator::new(label.clone(), responses)
        })
        .collect()
}

/// Generator labels in order of first appearance.
pub fn generator_order(records: &[CandidateRecord]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in records {
        if !out.contains(&r.generator) {
            out.push(r.generator.clone());
        }
    }
    out
}

/// Ground truth for the bugs present in `ensemble`.
pub fn truth_for(corpus: &[BugInstance], ensemble: &[BugOutcome]) -> BTreeMap<String, Truth> {
    let by_id: BTreeMap<&str, &BugInstance> = corpus.iter().map(|i| (i.id.as_str(), i)).collect();
    ensemble
        .iter()
        .filter_map(|b| by_id.get(b.id.as_str()))
        .map(|inst| {
            let buggy = inst.buggy_text().unwrap_or_default();
            (inst.id.clone(), Truth { buggy, fixed: inst.fixed_line.clone() })
        })
        .collect()
}

/// One run per standalone generator, then the ensemble.
pub fn model_runs(ensemble: &[BugOutcome], candidates: &[CandidateRecord]) -> Vec<ModelRun> {
    let mut runs: Vec<ModelRun> = generator_order(candidates)
        .into_iter()
        .map(|name| {
            let mut run = ModelRun { name: name.clone(), ..Default::default() };
            for r in candidates.iter().filter(|r| r.generator == name) {
                if r.error.is_some() {
                    run.unprocessed.insert(r.id.clone());
                }
                run.lists.insert(r.id.clone(), r.candidates.iter().map(|c| c.text.clone()).collect());
            }
            run
        })
        .collect();
    let mut ens = ModelRun { name: ENSEMBLE_MODEL.into(), ..Default::default() };
    for b in ensemble {
        if b.unprocessed {
            ens.unprocessed.insert(b.id.clone());
        }
        ens.lists.insert(b.id.clone(), b.texts());
    }
    runs.push(ens);
    runs
}
