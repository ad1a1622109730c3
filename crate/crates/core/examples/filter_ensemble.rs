//! Chains three generators through the patch filter. Unaltered and duplicate
//! candidates are dropped and the next generator refills the list.

use std::collections::BTreeMap;

use slicefix::encoder::{encode_input, EncodedInstance};
use slicefix::filter::{run_pipeline, EnsembleResult, Policy};
use slicefix::generators::{IdentityGenerator, MutateGenerator, MutationRule, PatchGenerator, ReplayGenerator};
use slicefix::java::StatementId;
use slicefix::slicer::{SliceContext, SlicedStatement};

pub fn run_example(policy: Policy) -> EnsembleResult {
    let ctx = SliceContext {
        buggy: SlicedStatement { id: StatementId(0), line: 1, text: "if ( a == b ) {".into() },
        intra: vec![],
        global: vec![],
    };
    let inst = EncodedInstance { id: "bug-1".into(), input: encode_input(&ctx, 64).unwrap() };
    let identity = IdentityGenerator::new("identity");
    let mutate = MutateGenerator::new("mutate", vec![MutationRule::EqNe]);
    let table =
        BTreeMap::from([("bug-1".to_string(), vec!["if ( a != b ) {".to_string(), "if ( a <= b ) {".to_string()])]);
    let replay = ReplayGenerator::from_table("replay", table);
    let chain: [&dyn PatchGenerator; 3] = [&identity, &mutate, &replay];
    run_pipeline(&chain, &[inst], 3, policy)
}

fn main() {
    for policy in [Policy::Refill, Policy::RouteBug] {
        let result = run_example(policy);
        println!("policy {policy}:");
        for c in &result.bugs[0].candidates {
            println!("  {}. {} (from {} #{})", c.rank, c.text, c.generator, c.source_rank);
        }
        for e in &result.bugs[0].trace {
            println!("  trace {}", serde_json::to_string(e).unwrap());
        }
    }
}
