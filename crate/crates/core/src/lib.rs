pub mod corpus;
pub mod depgraph;
pub mod encoder;
pub mod eval;
pub mod filter;
pub mod generators;
pub mod java;
pub mod jsonl;
pub mod pipeline;
pub mod slicer;
