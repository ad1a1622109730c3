//! Extracts the dependency context of a buggy statement: the method
//! statements it depends on or that depend on it, and the class members it
//! references.

use slicefix::depgraph::build_pdg;
use slicefix::java::{extract_class_context, parse_method};
use slicefix::slicer::{extract_dependency_context, SliceContext};

const CLASS: &str = include_str!("../tests/fixtures/edit_command_parser.java");
const METHOD: &str = include_str!("../tests/fixtures/edit_command_parser.method.java");

/// The buggy statement is normalized line 2, the tokenizer call.
pub const BUGGY_LINE: usize = 2;

pub fn run_example() -> SliceContext {
    let method = parse_method(METHOD).expect("method parses");
    let class = extract_class_context(Some(CLASS), &method.name).expect("class parses");
    let pdg = build_pdg(&method).expect("graph builds");
    let buggy = method.statement_at_line(BUGGY_LINE).expect("buggy statement").id;
    extract_dependency_context(&pdg, &method, &class, buggy).expect("slice")
}

fn main() {
    let ctx = run_example();
    println!("buggy  L{}: {}", ctx.buggy.line, ctx.buggy.text);
    for s in &ctx.intra {
        println!("intra  L{}: {}", s.line, s.text);
    }
    for g in &ctx.global {
        println!("global {}", g.text());
    }
}
