//! Runs every stage over a three-bug corpus with a config file and prints
//! the resulting report tables. Rerunning reuses every stage.

use std::path::Path;

use slicefix::pipeline::{run_all, PipelineConfig, RunSummary};

const CORPUS: &[&str] = &[
    r#"{"id":"off-by-one","repo":"acme/a","method_source":"int last(int[] xs) {\n int n = xs.length;\n return xs[n];\n}","buggy_line":2,"fixed_line":"return xs[n - 1];","benchmark":"BFP"}"#,
    r#"{"id":"flipped-eq","repo":"acme/b","method_source":"boolean empty(String s) {\n return s.length() == 0;\n}","buggy_line":1,"fixed_line":"return s.length() != 0;","benchmark":"Bugs.jar"}"#,
    r#"{"id":"and-or","repo":"acme/c","method_source":"boolean ok(boolean a, boolean b) {\n boolean r = a && b;\n return r;\n}","buggy_line":1,"fixed_line":"boolean r = a || b;","benchmark":"Defects4J"}"#,
];

const CONFIG: &str = r#"
corpus = "corpus.jsonl"
work_dir = "out"
backends = ["identity", "mutate:eq-ne+and-or", "replay:planted.json"]
policy = "refill"
k = 10
report_k = 5
"#;

pub fn run_example(dir: &Path) -> RunSummary {
    std::fs::write(dir.join("corpus.jsonl"), CORPUS.join("\n")).unwrap();
    std::fs::write(dir.join("planted.json"), r#"{"off-by-one": ["return xs [ n - 1 ] ;"]}"#).unwrap();
    std::fs::write(dir.join("slicefix.toml"), CONFIG).unwrap();
    let cfg = PipelineConfig::load(&dir.join("slicefix.toml")).expect("valid config");
    run_all(cfg).expect("pipeline runs")
}

fn main() {
    let dir = std::env::temp_dir().join("slicefix-end-to-end");
    std::fs::create_dir_all(&dir).unwrap();
    let summary = run_example(&dir);
    println!("ran {:?}, skipped {:?}", summary.ran, summary.skipped);
    print!("{}", summary.report.to_markdown());
    println!("artifacts in {}", dir.join("out").display());
}
