//! Scores two models against ground truth: Fix@k, bug types and overlap.

use std::collections::{BTreeMap, BTreeSet};

use slicefix::eval::{build_report, EvalReport, MatchMode, ModelRun, Truth};

fn run(name: &str, lists: &[(&str, &[&str])]) -> ModelRun {
    ModelRun {
        name: name.into(),
        lists: lists.iter().map(|(id, c)| (id.to_string(), c.iter().map(|s| s.to_string()).collect())).collect(),
        unprocessed: BTreeSet::new(),
    }
}

pub fn run_example() -> EvalReport {
    let truth: BTreeMap<String, Truth> = [
        ("b1", "x = y + 1 ;", "x = y - 1 ;"),
        ("b2", "f ( a ) ;", "f ( a , b ) ;"),
        ("b3", "if ( ok ) { skip ( ) ; }", ""),
        ("b4", "x = y ;", "x = g ( y ) + 1 ;"),
    ]
    .into_iter()
    .map(|(id, b, f)| (id.to_string(), Truth { buggy: b.into(), fixed: f.into() }))
    .collect();
    let a = run("A", &[("b1", &["x = y * 1 ;", "x = y - 1 ;"]), ("b2", &["f(a, b);"])]);
    let b = run("B", &[("b1", &["x = y - 1 ;"]), ("b3", &[""])]);
    build_report(&[a, b], &truth, 3, MatchMode::Token).expect("valid truth")
}

fn main() {
    print!("{}", run_example().to_markdown());
}
