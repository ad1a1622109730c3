//! Post-dominator tree by the iterative Cooper–Harvey–Kennedy scheme run on
//! the reversed CFG, rooted at EXIT.

use std::collections::BTreeMap;

use super::cfg::Cfg;
use super::{GraphError, NodeId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostDominators {
    ipdom: BTreeMap<NodeId, NodeId>,
}

impl PostDominators {
    /// Immediate post-dominator; `None` for EXIT.
    pub fn immediate(&self, n: NodeId) -> Option<NodeId> {
        self.ipdom.get(&n).copied()
    }

    pub fn as_map(&self) -> &BTreeMap<NodeId, NodeId> {
        &self.ipdom
    }

    /// Whether `a` post-dominates `b` (reflexive).
    pub fn post_dominates(&self, a: NodeId, b: NodeId) -> bool {
        let mut cur = Some(b);
        while let Some(n) = cur {
            if n == a {
                return true;
            }
            cur = self.immediate(n);
        }
        false
    }

    pub fn strictly_post_dominates(&self, a: NodeId, b: NodeId) -> bool {
        a != b && self.post_dominates(a, b)
    }
}

pub fn postdominators(g: &Cfg) -> Result<PostDominators, GraphError> {
    if let Some((n, _)) = g.reaches_exit().into_iter().find(|(_, ok)| !ok) {
        return Err(GraphError::ExitUnreachable(n));
    }
    let exit = g.idx(NodeId::Exit);
    let n = g.len();

    // Postorder of the reversed graph (edges followed backwards) from EXIT.
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut stack: Vec<(usize, usize)> = vec![(exit, 0)];
    visited[exit] = true;
    while let Some(top) = stack.last_mut() {
        let node = top.0;
        let preds = g.pred_indices(node);
        if top.1 < preds.len() {
            let p = preds[top.1];
            top.1 += 1;
            if !visited[p] {
                visited[p] = true;
                stack.push((p, 0));
            }
        } else {
            order.push(node);
            stack.pop();
        }
    }
    let mut po_number = vec![usize::MAX; n];
    for (i, &node) in order.iter().enumerate() {
        po_number[node] = i;
    }

    let mut idom: Vec<Option<usize>> = vec![None; n];
    idom[exit] = Some(exit);
    let intersect = |idom: &[Option<usize>], mut a: usize, mut b: usize| {
        while a != b {
            while po_number[a] < po_number[b] {
                a = idom[a].expect("processed");
            }
            while po_number[b] < po_number[a] {
                b = idom[b].expect("processed");
            }
        }
        a
    };

    let mut changed = true;
    while changed {
        changed = false;
        for &node in order.iter().rev() {
            if node == exit {
                continue;
            }
            // Predecessors in the reversed graph are CFG successors.
            let mut new_idom: Option<usize> = None;
            for &s in g.succ_indices(node) {
                if idom[s].is_none() {
                    continue;
                }
                new_idom = Some(match new_idom {
                    None => s,
                    Some(cur) => intersect(&idom, s, cur),
                });
            }
            if new_idom.is_some() && idom[node] != new_idom {
                idom[node] = new_idom;
                changed = true;
            }
        }
    }

    let ipdom =
        (0..n).filter(|&i| i != exit).map(|i| (g.node(i), g.node(idom[i].expect("every node reaches EXIT")))).collect();
    Ok(PostDominators { ipdom })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depgraph::build_cfg;
    use crate::depgraph::cfg::CfgEdge;
    use crate::java::{parse_method, StatementId};

    fn s(i: u32) -> NodeId {
        NodeId::Stmt(StatementId(i))
    }

    #[test]
    fn straight_line() {
        let pd = postdominators(&build_cfg(&parse_method("void f() { a = 1; b = 2; }").unwrap())).unwrap();
        assert_eq!(pd.immediate(s(0)), Some(s(1)));
        assert_eq!(pd.immediate(s(1)), Some(NodeId::Exit));
        assert_eq!(pd.immediate(NodeId::Entry), Some(s(0)));
        assert_eq!(pd.immediate(NodeId::Exit), None);
    }

    #[test]
    fn diamond_joins_at_the_merge_statement() {
        let pd =
            postdominators(&build_cfg(&parse_method("void f() { if (p) { a = 1; } else { b = 2; } c = 3; }").unwrap()))
                .unwrap();
        assert_eq!(pd.immediate(s(0)), Some(s(3)));
        assert!(pd.post_dominates(s(3), s(1)));
        assert!(!pd.post_dominates(s(1), s(0)));
    }

    #[test]
    fn exitless_graph_is_an_error() {
        let g = Cfg::from_edges(
            [StatementId(0)],
            [CfgEdge { from: NodeId::Entry, to: s(0), label: None }, CfgEdge { from: s(0), to: s(0), label: None }],
        );
        assert!(matches!(postdominators(&g), Err(GraphError::ExitUnreachable(_))));
    }
}
