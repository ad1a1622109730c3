use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use slicefix::corpus::{ingest, split_by_repo, BugInstance, CorpusFormat};
use slicefix::depgraph::{build_cfg, build_pdg};
use slicefix::encoder::{EncodedInstance, DEFAULT_BUDGET};
use slicefix::eval::{build_report, EvalReport, MatchMode, DEFAULT_REPORT_K};
use slicefix::filter::{run_pipeline, BugOutcome, Policy};
use slicefix::generators::{
    build_generator, parse_spec_list, serve_lines, BuildOptions, GeneratorSpec, PatchGenerator, DEFAULT_K,
    DEFAULT_TIMEOUT,
};
use slicefix::jsonl::{read_jsonl, write_jsonl};
use slicefix::pipeline::{
    cached_generators, encode_stage, generate_stage, graph_stage, model_runs, parse_stage, prepare, run_all,
    slice_stage, truth_for, write_report, CandidateRecord, ContextRecord, PipelineConfig, PipelineError, Stage,
    BACKEND_ENV,
};

#[derive(Parser)]
#[command(
    name = "slicefix",
    version,
    about = "Dependency-context slicing and patch-filter ensembles for single-line repair"
)]
struct Cli {
    /// Worker threads for per-bug parallelism (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a corpus into train/valid/test by repository.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "0.8,0.1,0.1")]
        ratios: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Parse every instance and report per-instance status.
    Parse {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Also write the instances that parsed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the control-flow or dependence graph of one instance.
    Graph {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
        #[arg(long, value_enum, default_value_t = GraphKind::Pdg)]
        kind: GraphKind,
    },
    /// Extract the dependency context of every instance.
    Extract {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode contexts into model inputs.
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Query one or more generators for every input.
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the generator ensemble through the patch filter.
    Run {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = Policy::Refill)]
        policy: Policy,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replay responses recorded by `generate` instead of querying backends.
        #[arg(long)]
        candidates: Option<PathBuf>,
    },
    /// Score an ensemble against the corpus ground truth.
    Eval {
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Standalone generator responses, scored alongside the ensemble.
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        tables: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_REPORT_K)]
        k: usize,
        #[arg(long, default_value_t = MatchMode::Token)]
        match_mode: MatchMode,
    },
    /// Render the markdown tables of a report.json.
    Report {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        tables: Option<PathBuf>,
    },
    /// Run every stage from a config file.
    Pipeline(PipelineArgs),
    /// Serve a generator over the line protocol on stdin/stdout.
    Serve {
        #[arg(long)]
        backend: GeneratorSpec,
    },
}

#[derive(Args)]
struct GenArgs {
    /// Comma-separated generator specs; defaults to $SLICEFIX_BACKEND.
    #[arg(long, visible_alias = "backend")]
    backends: Option<String>,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_TIMEOUT.as_secs())]
    timeout_secs: u64,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    work_dir: Option<PathBuf>,
    #[arg(long)]
    backends: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    policy: Option<Policy>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    match_mode: Option<MatchMode>,
    #[arg(long)]
    report_k: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Cfg,
    Pdg,
}

fn config_err(e: impl ToString) -> PipelineError {
    PipelineError::Config(e.to_string())
}

fn fatal(stage: Stage) -> impl Fn(io::Error) -> PipelineError {
    move |e| PipelineError::Fatal { stage, message: e.to_string() }
}

fn require(path: &Path) -> Result<(), PipelineError> {
    if path.exists() {
        Ok(())
    } else {
        Err(config_err(format!("{} does not exist", path.display())))
    }
}

fn read_input<T: serde::de::DeserializeOwned>(path: &Path, stage: Stage) -> Result<Vec<T>, PipelineError> {
    require(path)?;
    read_jsonl(path).map_err(fatal(stage))
}

fn load_corpus(path: &Path) -> Result<slicefix::corpus::Ingested, PipelineError> {
    require(path)?;
    ingest(path, CorpusFormat::Jsonl).map_err(fatal(Stage::Ingest))
}

fn generators(args: &GenArgs) -> Result<Vec<Box<dyn PatchGenerator>>, PipelineError> {
    let specs = resolve_backends(args.backends.as_deref())?;
    if args.k == 0 {
        return Err(config_err("k must be at least 1"));
    }
    let opts = BuildOptions { seed: args.seed, timeout: Duration::from_secs(args.timeout_secs) };
    specs.iter().map(|s| build_generator(s, &opts).map_err(config_err)).collect()
}

fn resolve_backends(flag: Option<&str>) -> Result<Vec<GeneratorSpec>, PipelineError> {
    let text = match flag {
        Some(t) => t.to_string(),
        None => std::env::var(BACKEND_ENV)
            .map_err(|_| config_err(format!("no --backends given and {BACKEND_ENV} is unset")))?,
    };
    parse_spec_list(&text).map_err(config_err)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Split { input, ratios, seed, out_dir } => {
            let parts: Vec<f64> = ratios
                .split(',')
                .map(|r| r.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| config_err(format!("--ratios: {e}")))?;
            let ratios: [f64; 3] = parts.try_into().map_err(|_| config_err("--ratios needs three values"))?;
            let corpus = load_corpus(&input)?;
            let split = split_by_repo(&corpus.instances, ratios, seed).map_err(config_err)?;
            let by_id: BTreeMap<&str, &BugInstance> = corpus.instances.iter().map(|i| (i.id.as_str(), i)).collect();
            for (name, ids) in ["train", "valid", "test"].into_iter().zip(split.parts()) {
                let items: Vec<&BugInstance> = ids.iter().map(|id| by_id[id.as_str()]).collect();
                write_jsonl(&out_dir.join(format!("{name}.jsonl")), items).map_err(fatal(Stage::Ingest))?;
            }
            write_json(&out_dir.join("split.json"), &split).map_err(fatal(Stage::Ingest))?;
            eprintln!(
                "train {} / valid {} / test {} (shares {:.3}/{:.3}/{:.3})",
                split.train.len(),
                split.valid.len(),
                split.test.len(),
                split.shares[0],
                split.shares[1],
                split.shares[2]
            );
        }
        Command::Parse { input, report, out } => {
            let corpus = load_corpus(&input)?;
            let (parsed, statuses) = parse_stage(&corpus);
            write_jsonl(&report, &statuses).map_err(fatal(Stage::Parse))?;
            if let Some(out) = out {
                write_jsonl(&out, &parsed).map_err(fatal(Stage::Parse))?;
            }
            eprintln!("{} parsed, {} failed", parsed.len(), statuses.len() - parsed.len());
        }
        Command::Graph { input, id, format, kind } => {
            let corpus = load_corpus(&input)?;
            let inst = corpus
                .instances
                .iter()
                .find(|i| i.id == id)
                .ok_or_else(|| config_err(format!("no instance `{id}` in {}", input.display())))?;
            let p = prepare(inst)
                .map_err(|s| PipelineError::Fatal { stage: Stage::Parse, message: s.message.unwrap_or_default() })?;
            let text = match (kind, format) {
                (GraphKind::Cfg, GraphFormat::Dot) => build_cfg(&p.method).to_dot(&p.method),
                (GraphKind::Cfg, GraphFormat::Json) => {
                    let cfg = build_cfg(&p.method);
                    serde_json::to_string_pretty(
                        &serde_json::json!({"id": id, "nodes": cfg.nodes(), "edges": cfg.edges()}),
                    )
                    .expect("serializable")
                }
                (GraphKind::Pdg, f) => {
                    let pdg = build_pdg(&p.method)
                        .map_err(|e| PipelineError::Fatal { stage: Stage::Graph, message: e.to_string() })?;
                    match f {
                        GraphFormat::Dot => pdg.to_dot(&p.method),
                        GraphFormat::Json => serde_json::to_string_pretty(&serde_json::json!({"id": id, "pdg": pdg}))
                            .expect("serializable"),
                    }
                }
            };
            let mut out = io::stdout().lock();
            writeln!(out, "{}", text.trim_end()).map_err(fatal(Stage::Graph))?;
        }
        Command::Extract { input, out } => {
            let corpus = load_corpus(&input)?;
            let (parsed, statuses) = parse_stage(&corpus);
            let (graphs, graph_failed) = graph_stage(&parsed);
            let (contexts, slice_failed) = slice_stage(&parsed, &graphs);
            write_jsonl(&out, &contexts).map_err(fatal(Stage::Slice))?;
            let failed = statuses.iter().filter(|s| !s.ok).count() + graph_failed.len() + slice_failed.len();
            eprintln!("{} contexts, {} instances failed", contexts.len(), failed);
        }
        Command::Encode { input, budget, out } => {
            let contexts: Vec<ContextRecord> = read_input(&input, Stage::Encode)?;
            let (encoded, failed) = encode_stage(&contexts, budget);
            write_jsonl(&out, &encoded).map_err(fatal(Stage::Encode))?;
            for f in &failed {
                eprintln!("{}: {}", f.id, f.message.as_deref().unwrap_or(""));
            }
            eprintln!("{} encoded, {} failed", encoded.len(), failed.len());
        }
        Command::Generate { gen, input, out } => {
            let gens = generators(&gen)?;
            let inputs: Vec<EncodedInstance> = read_input(&input, Stage::Generate)?;
            let mut records = Vec::new();
            for g in &gens {
                records.extend(generate_stage(g.as_ref(), &inputs, gen.k));
            }
            let errors = records.iter().filter(|r| r.error.is_some()).count();
            write_jsonl(&out, &records).map_err(fatal(Stage::Generate))?;
            eprintln!("{} responses, {} errors", records.len(), errors);
        }
        Command::Run { gen, policy, input, out, candidates } => {
            if gen.k == 0 {
                return Err(config_err("k must be at least 1"));
            }
            let inputs: Vec<EncodedInstance> = read_input(&input, Stage::Filter)?;
            let result = match candidates {
                Some(path) => {
                    let records: Vec<CandidateRecord> = read_input(&path, Stage::Filter)?;
                    let labels: Vec<String> = match gen.backends.as_deref() {
                        Some(_) => resolve_backends(gen.backends.as_deref())?.iter().map(|s| s.label()).collect(),
                        None => slicefix::pipeline::generator_order(&records),
                    };
                    let cached = cached_generators(&records, &labels);
                    let refs: Vec<&dyn PatchGenerator> = cached.iter().map(|g| g as &dyn PatchGenerator).collect();
                    run_pipeline(&refs, &inputs, gen.k, policy)
                }
                None => {
                    let gens = generators(&gen)?;
                    let refs: Vec<&dyn PatchGenerator> = gens.iter().map(|g| g.as_ref()).collect();
                    run_pipeline(&refs, &inputs, gen.k, policy)
                }
            };
            write_jsonl(&out, &result.bugs).map_err(fatal(Stage::Filter))?;
            let unprocessed = result.bugs.iter().filter(|b| b.unprocessed).count();
            eprintln!("{} bugs, {} unprocessed", result.bugs.len(), unprocessed);
        }
        Command::Eval { ensemble, truth, candidates, report, tables, k, match_mode } => {
            if k == 0 {
                return Err(config_err("k must be at least 1"));
            }
            let outcomes: Vec<BugOutcome> = read_input(&ensemble, Stage::Eval)?;
            let corpus = load_corpus(&truth)?;
            let records: Vec<CandidateRecord> = match &candidates {
                Some(p) => read_input(p, Stage::Eval)?,
                None => Vec::new(),
            };
            let truth = truth_for(&corpus.instances, &outcomes);
            let runs = model_runs(&outcomes, &records);
            let rep = build_report(&runs, &truth, k, match_mode)
                .map_err(|e| PipelineError::Fatal { stage: Stage::Eval, message: e.to_string() })?;
            let tables = tables.unwrap_or_else(|| report.with_extension("md"));
            write_report(&rep, &report, &tables).map_err(fatal(Stage::Eval))?;
            print_summary(&rep);
        }
        Command::Report { report, tables } => {
            require(&report)?;
            let text = std::fs::read_to_string(&report).map_err(fatal(Stage::Eval))?;
            let rep: EvalReport = serde_json::from_str(&text).map_err(config_err)?;
            match tables {
                Some(p) => std::fs::write(p, rep.to_markdown()).map_err(fatal(Stage::Eval))?,
                None => print!("{}", rep.to_markdown()),
            }
        }
        Command::Pipeline(args) => {
            let mut cfg = match &args.config {
                Some(p) => {
                    require(p)?;
                    PipelineConfig::load(p)?
                }
                None => PipelineConfig::default(),
            };
            if let Some(v) = args.corpus {
                cfg.corpus = v;
            }
            if let Some(v) = args.work_dir {
                cfg.work_dir = v;
            }
            if let Some(v) = args.backends {
                cfg.backends = parse_spec_list(&v).map_err(config_err)?;
            }
            cfg.k = args.k.unwrap_or(cfg.k);
            cfg.budget = args.budget.unwrap_or(cfg.budget);
            cfg.policy = args.policy.unwrap_or(cfg.policy);
            cfg.seed = args.seed.or(cfg.seed);
            cfg.match_mode = args.match_mode.unwrap_or(cfg.match_mode);
            cfg.report_k = args.report_k.unwrap_or(cfg.report_k);
            cfg.workers = cli.workers.or(cfg.workers);
            let summary = run_all(cfg)?;
            eprintln!(
                "ran {} stage(s), skipped {}; {} bugs evaluated, {} instances failed before generation",
                summary.ran.len(),
                summary.skipped.len(),
                summary.processed,
                summary.failed
            );
            print_summary(&summary.report);
        }
        Command::Serve { backend } => {
            let g = build_generator(&backend, &BuildOptions::default()).map_err(config_err)?;
            serve_lines(g.as_ref(), io::stdin().lock(), io::stdout().lock()).map_err(fatal(Stage::Generate))?;
        }
    }
    Ok(())
}

fn print_summary(rep: &EvalReport) {
    for m in &rep.models {
        if let Some(last) = m.fix_at_k.last() {
            eprintln!("{}: Fix@{} = {}/{} ({:.2}%)", m.name, last.k, last.fixed, last.total, last.rate * 100.0);
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
