use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::cfg::Cfg;
use super::postdom::PostDominators;
use super::{Branch, NodeId};
use crate::java::StatementId;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ControlEdge {
    pub from: NodeId,
    pub to: StatementId,
    pub label: Option<Branch>,
}

/// `y` depends on `x` when some successor `z` of `x` is post-dominated by
/// `y` (inclusively) while `y` does not strictly post-dominate `x`. For each
/// edge `x→z` this is the pdom-tree path from `z` up to, excluding,
/// `ipdom(x)`. Statements with no controller depend on ENTRY.
pub fn build_cdg(g: &Cfg, pdom: &PostDominators) -> Vec<ControlEdge> {
    let mut edges = BTreeSet::new();
    for e in g.edges() {
        if e.from == NodeId::Exit {
            continue;
        }
        let stop = pdom.immediate(e.from);
        let mut cur = Some(e.to);
        while let Some(y) = cur {
            if Some(y) == stop {
                break;
            }
            if let NodeId::Stmt(id) = y {
                edges.insert(ControlEdge { from: e.from, to: id, label: e.label });
            }
            cur = pdom.immediate(y);
        }
    }
    let controlled: BTreeSet<StatementId> = edges.iter().map(|e| e.to).collect();
    for n in g.nodes() {
        if let NodeId::Stmt(id) = n {
            if !controlled.contains(id) {
                edges.insert(ControlEdge { from: NodeId::Entry, to: *id, label: None });
            }
        }
    }
    edges.into_iter().collect()
}
