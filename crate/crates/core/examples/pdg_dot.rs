//! Prints the control-flow graph and program dependence graph of a small
//! method as Graphviz DOT. Control edges are solid, data edges dashed.

use slicefix::depgraph::{build_cfg, build_pdg};
use slicefix::java::parse_method;

const METHOD: &str = "int sum(int[] xs, int limit) {
    int total = 0;
    for (int i = 0; i < xs.length; i++) {
        if (total > limit) {
            break;
        }
        total += xs[i];
    }
    return total;
}";

pub fn run_example() -> (String, String) {
    let m = parse_method(METHOD).expect("method parses");
    let cfg = build_cfg(&m).to_dot(&m);
    let pdg = build_pdg(&m).expect("graph builds").to_dot(&m);
    (cfg, pdg)
}

fn main() {
    let (cfg, pdg) = run_example();
    println!("{cfg}\n{pdg}");
}
