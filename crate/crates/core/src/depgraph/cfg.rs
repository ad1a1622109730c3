use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Branch, NodeId};
use crate::java::{MethodAst, Node, StatementId, StatementKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CfgEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub label: Option<Branch>,
}

/// Statement-level control-flow graph with synthetic ENTRY and EXIT.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    nodes: Vec<NodeId>,
    index: BTreeMap<NodeId, usize>,
    edges: Vec<CfgEdge>,
    succs: Vec<Vec<usize>>,
    preds: Vec<Vec<usize>>,
}

impl Cfg {
    /// Graph over ENTRY, EXIT and `statements`, with exactly the given edges.
    /// No structural repair is applied.
    pub fn from_edges(
        statements: impl IntoIterator<Item = StatementId>,
        edges: impl IntoIterator<Item = CfgEdge>,
    ) -> Self {
        let mut nodes = vec![NodeId::Entry, NodeId::Exit];
        nodes.extend(statements.into_iter().map(NodeId::Stmt));
        let index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut cfg = Cfg {
            succs: vec![Vec::new(); nodes.len()],
            preds: vec![Vec::new(); nodes.len()],
            nodes,
            index,
            edges: Vec::new(),
        };
        for e in edges {
            cfg.add_edge(e);
        }
        cfg
    }

    fn add_edge(&mut self, e: CfgEdge) {
        let (f, t) = (self.index[&e.from], self.index[&e.to]);
        self.succs[f].push(t);
        self.preds[t].push(f);
        self.edges.push(e);
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[CfgEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.index.contains_key(&n)
    }

    pub(crate) fn idx(&self, n: NodeId) -> usize {
        self.index[&n]
    }

    pub(crate) fn node(&self, i: usize) -> NodeId {
        self.nodes[i]
    }

    pub(crate) fn succ_indices(&self, i: usize) -> &[usize] {
        &self.succs[i]
    }

    pub(crate) fn pred_indices(&self, i: usize) -> &[usize] {
        &self.preds[i]
    }

    pub fn successors(&self, n: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.succs[self.idx(n)].iter().map(|&i| self.nodes[i])
    }

    pub fn predecessors(&self, n: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.preds[self.idx(n)].iter().map(|&i| self.nodes[i])
    }

    fn reachable(&self, start: usize, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            let next = if forward { &self.succs[i] } else { &self.preds[i] };
            for &j in next {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen
    }

    /// Adds unlabeled ENTRY→n edges for nodes unreachable from ENTRY and
    /// n→EXIT edges for nodes that cannot reach EXIT.
    pub fn seal(&mut self) {
        let entry = self.idx(NodeId::Entry);
        let from_entry = self.reachable(entry, true);
        for i in 0..self.nodes.len() {
            if !from_entry[i] && self.nodes[i] != NodeId::Exit {
                self.add_edge(CfgEdge { from: NodeId::Entry, to: self.nodes[i], label: None });
            }
        }
        let exit = self.idx(NodeId::Exit);
        loop {
            let to_exit = self.reachable(exit, false);
            // Fix one node at a time, latest in source order first, so a whole
            // cycle gets a single synthetic exit.
            let Some(i) = (0..self.nodes.len()).rev().find(|&i| !to_exit[i]) else { break };
            self.add_edge(CfgEdge { from: self.nodes[i], to: NodeId::Exit, label: None });
        }
    }

    pub fn reaches_exit(&self) -> Vec<(NodeId, bool)> {
        let seen = self.reachable(self.idx(NodeId::Exit), false);
        self.nodes.iter().zip(seen).map(|(n, s)| (*n, s)).collect()
    }
}

struct LoopFrame {
    head: usize,
    breaks: Vec<Pending>,
}

type Pending = (NodeId, Option<Branch>);

struct Lowering<'a> {
    method: &'a MethodAst,
    edges: Vec<CfgEdge>,
    loops: Vec<LoopFrame>,
    // Statements seen inside each enclosing try body.
    try_bodies: Vec<Vec<StatementId>>,
}

impl Lowering<'_> {
    fn connect(&mut self, preds: &[Pending], to: NodeId) {
        for &(from, label) in preds {
            self.edges.push(CfgEdge { from, to, label });
        }
    }

    fn enter(&mut self, preds: &[Pending], id: StatementId) {
        self.connect(preds, NodeId::Stmt(id));
        for body in &mut self.try_bodies {
            body.push(id);
        }
    }

    fn seq(&mut self, nodes: &[Node], mut preds: Vec<Pending>) -> Vec<Pending> {
        for n in nodes {
            preds = self.lower(n, preds);
        }
        preds
    }

    fn lower(&mut self, node: &Node, preds: Vec<Pending>) -> Vec<Pending> {
        match node {
            Node::Simple(id) => {
                self.enter(&preds, *id);
                let here = NodeId::Stmt(*id);
                match self.method.statements[id.index()].kind {
                    StatementKind::Return | StatementKind::Throw => {
                        self.edges.push(CfgEdge { from: here, to: NodeId::Exit, label: None });
                        Vec::new()
                    }
                    StatementKind::Break => {
                        if let Some(frame) = self.loops.last_mut() {
                            frame.breaks.push((here, None));
                            Vec::new()
                        } else {
                            vec![(here, None)]
                        }
                    }
                    StatementKind::Continue => {
                        if let Some(head) = self.loops.last().map(|f| f.head) {
                            self.edges.push(CfgEdge {
                                from: here,
                                to: NodeId::Stmt(StatementId(head as u32)),
                                label: None,
                            });
                            Vec::new()
                        } else {
                            vec![(here, None)]
                        }
                    }
                    _ => vec![(here, None)],
                }
            }
            Node::Block(nodes) => self.seq(nodes, preds),
            Node::If { cond, then_branch, else_branch } => {
                self.enter(&preds, *cond);
                let c = NodeId::Stmt(*cond);
                let mut out = self.seq(then_branch, vec![(c, Some(Branch::True))]);
                match else_branch {
                    Some(e) => out.extend(self.seq(e, vec![(c, Some(Branch::False))])),
                    None => out.push((c, Some(Branch::False))),
                }
                out
            }
            Node::Loop { head, body } => {
                self.enter(&preds, *head);
                let h = NodeId::Stmt(*head);
                self.loops.push(LoopFrame { head: head.index(), breaks: Vec::new() });
                let body_out = self.seq(body, vec![(h, Some(Branch::True))]);
                self.connect(&body_out, h);
                let frame = self.loops.pop().expect("pushed");
                let mut out = vec![(h, Some(Branch::False))];
                out.extend(frame.breaks);
                out
            }
            Node::Try { head, body, catches, finally } => {
                self.enter(&preds, *head);
                let h = NodeId::Stmt(*head);
                self.try_bodies.push(Vec::new());
                let mut out = self.seq(body, vec![(h, None)]);
                let covered = self.try_bodies.pop().expect("pushed");
                for (catch_id, catch_body) in catches {
                    let c = NodeId::Stmt(*catch_id);
                    if covered.is_empty() {
                        self.edges.push(CfgEdge { from: h, to: c, label: Some(Branch::Exception) });
                    }
                    for s in &covered {
                        self.edges.push(CfgEdge { from: NodeId::Stmt(*s), to: c, label: Some(Branch::Exception) });
                    }
                    for body in &mut self.try_bodies {
                        body.push(*catch_id);
                    }
                    out.extend(self.seq(catch_body, vec![(c, None)]));
                }
                match finally {
                    Some(f) => self.seq(f, out),
                    None => out,
                }
            }
        }
    }
}

/// Lowers the method body: straight-line statements chain, predicates fork on
/// labeled edges, `return`/`throw` go to EXIT, and every statement of a try
/// body gets an exception edge to each catch head.
pub fn build_cfg(m: &MethodAst) -> Cfg {
    let mut lowering = Lowering { method: m, edges: Vec::new(), loops: Vec::new(), try_bodies: Vec::new() };
    let out = lowering.seq(&m.body, vec![(NodeId::Entry, None)]);
    lowering.connect(&out, NodeId::Exit);
    let mut cfg = Cfg::from_edges(m.statements.iter().map(|s| s.id), lowering.edges);
    cfg.seal();
    cfg
}
