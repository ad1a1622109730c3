//! Consolidated model input.
//!
//! ```text
//! <GLB> (g <SEP>)* <CTX> (c <SEP>)* <BOL> b+ <EOL>
//! ```
//!
//! Content tokens are lexical tokens; any `<` inside one is written `\<`
//! so no content token can be mistaken for a marker.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::java::token_texts;
use crate::slicer::SliceContext;

pub const GLB: &str = "<GLB>";
pub const CTX: &str = "<CTX>";
pub const BOL: &str = "<BOL>";
pub const EOL: &str = "<EOL>";
pub const SEP: &str = "<SEP>";
pub const MARKERS: [&str; 5] = [GLB, CTX, BOL, EOL, SEP];
pub const DEFAULT_BUDGET: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("budget {budget} cannot hold the buggy statement ({needed} tokens needed)")]
    BudgetTooSmall { budget: usize, needed: usize },
    #[error("buggy statement has no tokens")]
    EmptyBuggy,
    #[error("malformed input at token {position}: {message}")]
    Malformed { position: usize, message: String },
}

/// Token ranges of each segment's content, markers excluded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parts {
    pub global: Range<usize>,
    pub context: Range<usize>,
    pub buggy: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInput {
    pub tokens: Vec<String>,
    pub parts: Parts,
    pub truncated: bool,
    pub budget: usize,
    pub dropped_context: usize,
    pub dropped_global: usize,
}

impl ModelInput {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    /// The buggy statement as normalized source text.
    pub fn buggy_text(&self) -> String {
        unescape_join(&self.tokens[self.parts.buggy.clone()])
    }
}

/// One encoded corpus instance, as stored in `inputs.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedInstance {
    pub id: String,
    pub input: ModelInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodedParts {
    pub global: Vec<String>,
    pub context: Vec<String>,
    pub buggy: String,
}

pub fn escape_token(t: &str) -> String {
    t.replace('<', "\\<")
}

pub fn unescape_token(t: &str) -> String {
    t.replace("\\<", "<")
}

fn content_tokens(text: &str) -> Vec<String> {
    token_texts(text).iter().map(|t| escape_token(t)).collect()
}

fn unescape_join(tokens: &[String]) -> String {
    tokens.iter().map(|t| unescape_token(t)).collect::<Vec<_>>().join(" ")
}

/// Serializes `sc`, dropping whole context items until the sequence fits
/// `budget`. Intra statements go farthest-from-the-buggy-line first (the
/// earlier one on ties) until one is left, then global items from the end,
/// then the last intra statement.
pub fn encode_input(sc: &SliceContext, budget: usize) -> Result<ModelInput, EncodeError> {
    let buggy = content_tokens(&sc.buggy.text);
    if buggy.is_empty() {
        return Err(EncodeError::EmptyBuggy);
    }
    let needed = buggy.len() + 4;
    if budget < needed {
        return Err(EncodeError::BudgetTooSmall { budget, needed });
    }

    let mut global: Vec<Vec<String>> = sc.global.iter().map(|g| content_tokens(g.text())).collect();
    let mut intra: Vec<(usize, Vec<String>)> = sc.intra.iter().map(|s| (s.line, content_tokens(&s.text))).collect();
    let size = |items: &[Vec<String>]| items.iter().map(|t| t.len() + 1).sum::<usize>();
    let mut total = needed + size(&global) + intra.iter().map(|(_, t)| t.len() + 1).sum::<usize>();

    let (mut dropped_context, mut dropped_global) = (0, 0);
    while total > budget {
        let removed = if intra.len() > 1 {
            let far = farthest(&intra, sc.buggy.line);
            dropped_context += 1;
            intra.remove(far).1
        } else if let Some(g) = global.pop() {
            dropped_global += 1;
            g
        } else {
            dropped_context += 1;
            intra.pop().expect("total exceeds budget only with context left").1
        };
        total -= removed.len() + 1;
    }

    let mut tokens = Vec::with_capacity(total);
    tokens.push(GLB.to_string());
    let g_start = tokens.len();
    for g in global {
        tokens.extend(g);
        tokens.push(SEP.to_string());
    }
    let g_end = tokens.len();
    tokens.push(CTX.to_string());
    let c_start = tokens.len();
    for (_, c) in intra {
        tokens.extend(c);
        tokens.push(SEP.to_string());
    }
    let c_end = tokens.len();
    tokens.push(BOL.to_string());
    let b_start = tokens.len();
    tokens.extend(buggy);
    let b_end = tokens.len();
    tokens.push(EOL.to_string());
    debug_assert_eq!(tokens.len(), total);

    Ok(ModelInput {
        tokens,
        parts: Parts { global: g_start..g_end, context: c_start..c_end, buggy: b_start..b_end },
        truncated: dropped_context + dropped_global > 0,
        budget,
        dropped_context,
        dropped_global,
    })
}

fn farthest(intra: &[(usize, Vec<String>)], buggy_line: usize) -> usize {
    let mut best = 0;
    for (i, (line, _)) in intra.iter().enumerate() {
        if line.abs_diff(buggy_line) > intra[best].0.abs_diff(buggy_line) {
            best = i;
        }
    }
    best
}

/// Rebuilds a [`ModelInput`] from a token sequence received over the wire.
/// The budget is taken to be the sequence length.
pub fn input_from_tokens(tokens: Vec<String>) -> Result<ModelInput, EncodeError> {
    decode_parts(&tokens)?;
    let find = |m: &str| tokens.iter().position(|t| t == m).expect("validated");
    let (ctx, bol) = (find(CTX), find(BOL));
    let budget = tokens.len();
    Ok(ModelInput {
        parts: Parts { global: 1..ctx, context: ctx + 1..bol, buggy: bol + 1..budget - 1 },
        tokens,
        truncated: false,
        budget,
        dropped_context: 0,
        dropped_global: 0,
    })
}

/// Inverse of [`encode_input`] on the three text parts.
pub fn decode_parts<S: AsRef<str>>(tokens: &[S]) -> Result<DecodedParts, EncodeError> {
    let malformed = |position: usize, message: &str| EncodeError::Malformed { position, message: message.into() };
    let tok = |i: usize| tokens.get(i).map(|t| t.as_ref());

    if tok(0) != Some(GLB) {
        return Err(malformed(0, "expected <GLB>"));
    }
    let mut pos = 1;
    let global = read_items(tokens, &mut pos, CTX)?;
    pos += 1;
    let context = read_items(tokens, &mut pos, BOL)?;
    pos += 1;
    let start = pos;
    while let Some(t) = tok(pos) {
        if t == EOL {
            break;
        }
        if MARKERS.contains(&t) {
            return Err(malformed(pos, "marker inside the buggy segment"));
        }
        pos += 1;
    }
    if tok(pos).is_none() {
        return Err(malformed(pos, "missing <EOL>"));
    }
    if pos == start {
        return Err(malformed(pos, "empty buggy segment"));
    }
    if pos + 1 != tokens.len() {
        return Err(malformed(pos + 1, "tokens after <EOL>"));
    }
    let buggy: Vec<String> = tokens[start..pos].iter().map(|t| t.as_ref().to_string()).collect();
    Ok(DecodedParts { global, context, buggy: unescape_join(&buggy) })
}

/// Reads `<SEP>`-separated items up to `end`, leaving `pos` on `end`.
fn read_items<S: AsRef<str>>(tokens: &[S], pos: &mut usize, end: &str) -> Result<Vec<String>, EncodeError> {
    let mut items = Vec::new();
    let mut current: Vec<String> = Vec::new();
    loop {
        let Some(t) = tokens.get(*pos).map(|t| t.as_ref()) else {
            return Err(EncodeError::Malformed { position: *pos, message: format!("missing {end}") });
        };
        if t == end {
            break;
        }
        if t == SEP {
            if !current.is_empty() {
                items.push(unescape_join(&current));
                current.clear();
            }
        } else if MARKERS.contains(&t) {
            return Err(EncodeError::Malformed { position: *pos, message: format!("unexpected {t} before {end}") });
        } else {
            current.push(t.to_string());
        }
        *pos += 1;
    }
    if !current.is_empty() {
        items.push(unescape_join(&current));
    }
    Ok(items)
}
