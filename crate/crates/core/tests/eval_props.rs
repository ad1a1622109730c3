mod common;

use common::{random_report, report_identity_violations, rng};
use proptest::prelude::*;
use slicefix::eval::{exact_match, overlap_matrix};

proptest! {
    #[test]
    fn report_identities(seed in any::<u64>(), k in 1usize..12) {
        let r = random_report(&mut rng(seed), k);
        let errs = report_identity_violations(&r);
        prop_assert!(errs.is_empty(), "{:?}", errs);
        let json = serde_json::to_string(&r).unwrap();
        prop_assert_eq!(serde_json::from_str::<slicefix::eval::EvalReport>(&json).unwrap(), r);
    }

    #[test]
    fn exact_match_is_an_equivalence(a in "[xy=+; ]{0,8}", b in "[xy=+; ]{0,8}", c in "[xy=+; ]{0,8}") {
        prop_assert!(exact_match(&a, &a));
        prop_assert_eq!(exact_match(&a, &b), exact_match(&b, &a));
        if exact_match(&a, &b) && exact_match(&b, &c) {
            prop_assert!(exact_match(&a, &c));
        }
    }

    #[test]
    fn overlap_against_set_arithmetic(sets in proptest::collection::vec(proptest::collection::btree_set(0u8..12, 0..8), 1..5)) {
        let named: Vec<(String, std::collections::BTreeSet<String>)> =
            sets.iter().enumerate().map(|(i, s)| (format!("m{i}"), s.iter().map(|x| x.to_string()).collect())).collect();
        let o = overlap_matrix(&named).unwrap();
        for (i, (_, a)) in named.iter().enumerate() {
            let others: std::collections::BTreeSet<&String> =
                named.iter().enumerate().filter(|(j, _)| *j != i).flat_map(|(_, (_, s))| s.iter()).collect();
            prop_assert_eq!(o.unique[i], a.iter().filter(|x| !others.contains(x)).count());
            for (j, (_, b)) in named.iter().enumerate() {
                let want = if a.is_empty() { 0.0 } else { a.intersection(b).count() as f64 / a.len() as f64 };
                prop_assert!((o.ratio[i][j] - want).abs() < 1e-12);
            }
        }
    }
}
