mod common;

use common::{dataflow_discrepancies, random_method, slice_discrepancies};

#[test]
fn generated_methods_parse_with_expected_shape() {
    let g = random_method(3);
    assert!(g.statements >= 1 && g.statements <= 10, "{}", g.source);
}

#[test]
fn dataflow_matches_oracles() {
    for seed in 0..300 {
        let errs = dataflow_discrepancies(&random_method(seed));
        assert!(errs.is_empty(), "seed {seed}:\n{}", errs.join("\n"));
    }
}

#[test]
fn slices_match_bfs() {
    for seed in 0..300 {
        let errs = slice_discrepancies(&random_method(seed));
        assert!(errs.is_empty(), "seed {seed}:\n{}", errs.join("\n"));
    }
}
