//! Splits a synthetic corpus 80/10/10 with no repository shared across splits.

use slicefix::corpus::{split_by_repo, Benchmark, BugInstance, CorpusSplit};

pub fn corpus() -> Vec<BugInstance> {
    (0..60)
        .flat_map(|r| {
            (0..1 + r % 5).map(move |i| BugInstance {
                id: format!("repo{r}-bug{i}"),
                repo: format!("org/repo{r}"),
                class_source: None,
                method_source: "void f() {\n go();\n}".into(),
                buggy_line: 1,
                fixed_line: "stop();".into(),
                benchmark: Benchmark::Bfp,
            })
        })
        .collect()
}

pub fn run_example(seed: u64) -> CorpusSplit {
    split_by_repo(&corpus(), [0.8, 0.1, 0.1], seed).expect("enough repositories")
}

fn main() {
    let s = run_example(7);
    println!("train {} valid {} test {}", s.train.len(), s.valid.len(), s.test.len());
    println!("shares {:.3?} within tolerance: {}", s.shares, s.within_tolerance);
    println!("test repos: {:?}", s.repos[2]);
}
