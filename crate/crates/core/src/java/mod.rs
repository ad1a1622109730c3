//! Front end for the supported Java-like subset: lexing, layout
//! normalization, method parsing, ingredient collection and class context.

mod ast;
mod class;
mod ingredients;
pub mod lexer;
mod parser;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::*;
pub use class::{extract_class_context, ClassContext, MethodSignature, PublicField};
pub use ingredients::{collect_ingredients, IngredientSet, Invocation};
pub use lexer::{normalize_method_text, token_texts};
pub use parser::parse_method;

/// The source is outside the supported grammar subset.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("parse failure at line {line}: {message}")]
pub struct ParseFailure {
    /// 0-based line in the normalized text (method) or raw source (class).
    pub line: usize,
    pub message: String,
}
