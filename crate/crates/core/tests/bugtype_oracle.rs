mod common;

use common::{bug_type_of, minimal_kind_sets, rng, synthesize_pair};
use proptest::prelude::*;
use rand::Rng;
use slicefix::eval::{classify_bug_type, edit_script, BugType, EditKind};

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

#[test]
fn synthesized_pairs_agree_with_labels() {
    let mut r = rng(31);
    for i in 0..400 {
        let label = BugType::ALL[i % 4];
        let (b, f) = synthesize_pair(&mut r, label);
        let sets = minimal_kind_sets(&b, &f);
        assert!(sets.iter().all(|s| bug_type_of(s) == label), "{b:?} -> {f:?}: {sets:?}");
        assert_eq!(classify_bug_type(&b.join(" "), &f.join(" ")).unwrap(), label, "{b:?} -> {f:?}");
    }
}

#[test]
fn wrapping_a_value_is_an_insertion() {
    let ty = classify_bug_type("x = y", "x = g ( y ) + 1").unwrap();
    assert_eq!(ty, BugType::SimpleInsert);
    let sets = minimal_kind_sets(&toks("x = y"), &toks("x = g ( y ) + 1"));
    assert!(sets.iter().all(|s| bug_type_of(s) == BugType::SimpleInsert));
}

proptest! {
    #[test]
    fn edit_script_is_minimal_and_applies(a in proptest::collection::vec(0u8..4, 0..9), b in proptest::collection::vec(0u8..4, 0..9)) {
        let a: Vec<String> = a.iter().map(|x| format!("t{x}")).collect();
        let b: Vec<String> = b.iter().map(|x| format!("t{x}")).collect();
        let script = edit_script(&a, &b);
        // Cost equals the oracle's minimum.
        let oracle_cost = {
            let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
            for i in 0..=a.len() { d[i][0] = i; }
            for j in 0..=b.len() { d[0][j] = j; }
            for i in 1..=a.len() {
                for j in 1..=b.len() {
                    let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
                    d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
                }
            }
            d[a.len()][b.len()]
        };
        prop_assert_eq!(script.len(), oracle_cost);
        if a != b {
            let kinds: std::collections::BTreeSet<_> = script.iter().map(|e| match e.kind {
                EditKind::Insert => common::Kind::Insert,
                EditKind::Delete => common::Kind::Delete,
                EditKind::Replace => common::Kind::Replace,
            }).collect();
            prop_assert!(minimal_kind_sets(&a, &b).contains(&kinds));
        }
    }
}

#[test]
fn unambiguous_random_pairs_match_the_oracle() {
    let mut r = rng(32);
    let mut checked = 0;
    for _ in 0..400 {
        let a: Vec<String> = (0..r.gen_range(1..8)).map(|_| format!("t{}", r.gen_range(0..4))).collect();
        let b: Vec<String> = (0..r.gen_range(0..8)).map(|_| format!("t{}", r.gen_range(0..4))).collect();
        if a == b {
            continue;
        }
        let types: std::collections::BTreeSet<BugType> = minimal_kind_sets(&a, &b).iter().map(bug_type_of).collect();
        let got = classify_bug_type(&a.join(" "), &b.join(" ")).unwrap();
        assert!(types.contains(&got) || b.is_empty(), "{a:?} -> {b:?}");
        if types.len() == 1 {
            checked += 1;
            assert_eq!(Some(&got), types.first());
        }
    }
    assert!(checked > 100);
}
