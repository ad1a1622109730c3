//! Encodes a dependency context into the marker-delimited model input, then
//! shows how truncation behaves under a tight token budget.

use slicefix::encoder::{decode_parts, encode_input, ModelInput};
use slicefix::java::StatementId;
use slicefix::slicer::{GlobalItem, SliceContext, SlicedStatement};

fn stmt(id: u32, line: usize, text: &str) -> SlicedStatement {
    SlicedStatement { id: StatementId(id), line, text: text.into() }
}

pub fn context() -> SliceContext {
    SliceContext {
        buggy: stmt(2, 3, "if ( count < LIMIT ) {"),
        intra: vec![
            stmt(0, 1, "int count = items . size ( ) ;"),
            stmt(1, 2, "log ( count ) ;"),
            stmt(3, 4, "flush ( ) ;"),
        ],
        global: vec![GlobalItem::Field {
            name: "LIMIT".into(),
            declaration: "public static final int LIMIT = 8 ;".into(),
        }],
    }
}

pub fn run_example() -> (ModelInput, ModelInput) {
    let ctx = context();
    let full = encode_input(&ctx, 512).expect("fits");
    let tight = encode_input(&ctx, 20).expect("buggy segment fits");
    (full, tight)
}

fn main() {
    let (full, tight) = run_example();
    println!("full  ({} tokens): {}", full.tokens.len(), full.text());
    println!("tight ({} tokens): {}", tight.tokens.len(), tight.text());
    println!("dropped {} context and {} global items", tight.dropped_context, tight.dropped_global);
    let parts = decode_parts(&tight.tokens).expect("well formed");
    println!("buggy segment survives: {:?}", parts.buggy);
}
