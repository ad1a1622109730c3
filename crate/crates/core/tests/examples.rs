#[allow(dead_code)]
#[path = "../examples/dependency_context.rs"]
mod dependency_context;
#[allow(dead_code)]
#[path = "../examples/encode_model_input.rs"]
mod encode_model_input;
#[allow(dead_code)]
#[path = "../examples/end_to_end.rs"]
mod end_to_end;
#[allow(dead_code)]
#[path = "../examples/evaluate_report.rs"]
mod evaluate_report;
#[allow(dead_code)]
#[path = "../examples/external_backend.rs"]
mod external_backend;
#[allow(dead_code)]
#[path = "../examples/filter_ensemble.rs"]
mod filter_ensemble;
#[allow(dead_code)]
#[path = "../examples/pdg_dot.rs"]
mod pdg_dot;
#[allow(dead_code)]
#[path = "../examples/split_corpus.rs"]
mod split_corpus;

use slicefix::eval::BugType;
use slicefix::filter::Policy;

#[test]
fn dependency_context_lines() {
    let ctx = dependency_context::run_example();
    assert_eq!(ctx.buggy.line, dependency_context::BUGGY_LINE);
    assert_eq!(ctx.intra.iter().map(|s| s.line).collect::<Vec<_>>(), [1, 3, 6, 7]);
    let names: Vec<&str> = ctx.global.iter().map(|g| g.name()).collect();
    assert_eq!(names, ["PREFIX_DEADLINE", "parseTagsForEdit"]);
}

#[test]
fn dot_output_marks_edge_styles() {
    let (cfg, pdg) = pdg_dot::run_example();
    assert!(cfg.contains("S1 -> S5 [label=\"F\"]"));
    assert!(pdg.contains("style=dashed, label=\"total\""));
    assert!(pdg.contains("style=solid, label=\"T\""));
}

#[test]
fn encoding_example_truncates_context_first() {
    let (full, tight) = encode_model_input::run_example();
    assert!(!full.truncated);
    assert!(tight.truncated && tight.tokens.len() <= 20);
    assert_eq!(full.buggy_text(), tight.buggy_text());
    assert_eq!(tight.dropped_global, 1);
}

#[test]
fn ensemble_example_policies() {
    let refill = filter_ensemble::run_example(Policy::Refill);
    assert_eq!(refill.bugs[0].texts(), ["if ( a != b ) {", "if ( a <= b ) {"]);
    let route = filter_ensemble::run_example(Policy::RouteBug);
    assert_eq!(route.bugs[0].texts(), ["if ( a != b ) {"]);
}

#[test]
fn report_example_counts() {
    let r = evaluate_report::run_example();
    assert_eq!(r.models[0].correct, ["b1", "b2"]);
    assert_eq!(r.models[1].correct, ["b1", "b3"]);
    assert_eq!(r.corpus_bug_types[&BugType::SimpleInsert], 2);
    assert_eq!(r.overlap.unique, [1, 1]);
}

#[test]
fn split_example_is_clean() {
    let s = split_corpus::run_example(7);
    assert!(s.within_tolerance);
    assert_eq!(s, split_corpus::run_example(7));
}

#[test]
fn external_backends_answer() {
    let (child, http) = external_backend::run_example();
    assert_eq!(child.iter().map(|c| c.text.as_str()).collect::<Vec<_>>(), ["x = 2 ;", "x = 3 ;"]);
    assert_eq!(http.unwrap()[0].text, "x = 2 ;");
}

#[test]
fn end_to_end_example_reuses_stages() {
    let dir = tempfile::tempdir().unwrap();
    let first = end_to_end::run_example(dir.path());
    assert_eq!(first.ran.len(), 7);
    let ensemble = first.report.models.iter().find(|m| m.name == "ensemble").unwrap();
    assert_eq!(ensemble.correct.len(), 3);
    assert_eq!(first.report.models[0].fix_at_k.iter().map(|f| f.fixed).sum::<usize>(), 0);
    let second = end_to_end::run_example(dir.path());
    assert_eq!(second.skipped.len(), 7);
}
