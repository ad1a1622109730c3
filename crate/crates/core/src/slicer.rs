//! Dependency-context extraction: bidirectional PDG slice from the buggy
//! statement plus class-level declarations matched by ingredient.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::depgraph::Pdg;
use crate::java::{collect_ingredients, ClassContext, IngredientSet, MethodAst, Statement, StatementId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SliceError {
    #[error("statement {0} is not in the dependence graph")]
    UnknownStatement(StatementId),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlicedStatement {
    pub id: StatementId,
    /// Line in the normalized method text.
    pub line: usize,
    pub text: String,
}

impl From<&Statement> for SlicedStatement {
    fn from(s: &Statement) -> Self {
        SlicedStatement { id: s.id, line: s.line, text: s.text.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GlobalItem {
    Field { name: String, declaration: String },
    Method { name: String, arity: usize, signature: String },
}

impl GlobalItem {
    pub fn name(&self) -> &str {
        match self {
            GlobalItem::Field { name, .. } | GlobalItem::Method { name, .. } => name,
        }
    }

    /// Text placed in the model input.
    pub fn text(&self) -> &str {
        match self {
            GlobalItem::Field { declaration, .. } => declaration,
            GlobalItem::Method { signature, .. } => signature,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceContext {
    pub buggy: SlicedStatement,
    /// Source order, buggy statement excluded.
    pub intra: Vec<SlicedStatement>,
    /// Class declaration order.
    pub global: Vec<GlobalItem>,
}

/// Transitive dependence predecessors of `n` together with its transitive
/// successors, over control and data edges. The two directions are
/// explored independently, so statements reached forward are not expanded
/// backward. `n` and ENTRY are excluded.
pub fn bidirectional_slice(pdg: &Pdg, n: StatementId) -> Result<BTreeSet<StatementId>, SliceError> {
    if !pdg.contains(n) {
        return Err(SliceError::UnknownStatement(n));
    }
    let (fwd, bwd) = pdg.adjacency();
    let mut out = closure(&bwd, n);
    out.extend(closure(&fwd, n));
    out.remove(&n);
    Ok(out)
}

fn closure(adj: &BTreeMap<StatementId, Vec<StatementId>>, start: StatementId) -> BTreeSet<StatementId> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        for &next in adj.get(&cur).into_iter().flatten() {
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    seen
}

pub fn extract_dependency_context(
    pdg: &Pdg,
    m: &MethodAst,
    cc: &ClassContext,
    buggy: StatementId,
) -> Result<SliceContext, SliceError> {
    let slice = bidirectional_slice(pdg, buggy)?;
    let buggy_stmt = m.statement(buggy).ok_or(SliceError::UnknownStatement(buggy))?;
    let mut intra: Vec<&Statement> =
        slice.iter().map(|&id| m.statement(id).ok_or(SliceError::UnknownStatement(id))).collect::<Result<_, _>>()?;
    intra.sort_by_key(|s| (s.line, s.id));

    let mut ingredients = collect_ingredients(buggy_stmt);
    for s in &intra {
        let IngredientSet { vars_used, invocations, .. } = collect_ingredients(s);
        ingredients.vars_used.extend(vars_used);
        ingredients.invocations.extend(invocations);
    }

    Ok(SliceContext {
        buggy: buggy_stmt.into(),
        intra: intra.into_iter().map(SlicedStatement::from).collect(),
        global: match_globals(cc, &ingredients),
    })
}

/// Public fields named by a variable use and public methods whose name and
/// arity fit some invocation, in class declaration order.
pub fn match_globals(cc: &ClassContext, ingredients: &IngredientSet) -> Vec<GlobalItem> {
    let mut hits: Vec<((usize, usize), GlobalItem)> = Vec::new();
    for f in &cc.public_fields {
        if ingredients.vars_used.contains(&f.name) {
            hits.push((f.span, GlobalItem::Field { name: f.name.clone(), declaration: f.declaration.clone() }));
        }
    }
    for sig in &cc.public_method_signatures {
        if ingredients.invocations.iter().any(|inv| inv.name == sig.name && sig.accepts_arity(inv.arity)) {
            hits.push((
                sig.span,
                GlobalItem::Method { name: sig.name.clone(), arity: sig.arity, signature: sig.signature.clone() },
            ));
        }
    }
    hits.sort_by_key(|(span, _)| *span);
    hits.into_iter().map(|(_, item)| item).collect()
}
