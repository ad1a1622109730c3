//! Control-flow, post-dominance, control-dependence, data-dependence and
//! program dependence graphs for a single parsed method.

mod cdg;
mod cfg;
mod ddg;
mod postdom;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cdg::{build_cdg, ControlEdge};
pub use cfg::{build_cfg, Cfg, CfgEdge};
pub use ddg::{build_ddg, def_use_sets, reaching_definition_edges, DataEdge};
pub use postdom::{postdominators, PostDominators};

use crate::java::{MethodAst, StatementId};

/// A CFG/PDG vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum NodeId {
    Entry,
    Exit,
    Stmt(StatementId),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Entry => f.write_str("ENTRY"),
            NodeId::Exit => f.write_str("EXIT"),
            NodeId::Stmt(id) => write!(f, "{id}"),
        }
    }
}

impl From<NodeId> for String {
    fn from(n: NodeId) -> String {
        n.to_string()
    }
}

impl TryFrom<String> for NodeId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl FromStr for NodeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ENTRY" => Ok(NodeId::Entry),
            "EXIT" => Ok(NodeId::Exit),
            _ => s
                .strip_prefix('S')
                .and_then(|n| n.parse().ok())
                .map(|n| NodeId::Stmt(StatementId(n)))
                .ok_or_else(|| format!("invalid node id `{s}`")),
        }
    }
}

/// Polarity of a CFG edge leaving a branching node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    True,
    False,
    Exception,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::True => "T",
            Branch::False => "F",
            Branch::Exception => "exc",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("EXIT is unreachable from {0}")]
    ExitUnreachable(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Dependence {
    Control { label: Option<Branch> },
    Data { var: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PdgEdge {
    pub src: NodeId,
    pub dst: StatementId,
    #[serde(flatten)]
    pub dep: Dependence,
}

/// Statement-granularity dependence graph: CDG ∪ DDG.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pdg {
    pub nodes: Vec<StatementId>,
    pub control: Vec<ControlEdge>,
    pub data: Vec<DataEdge>,
}

impl Pdg {
    pub fn contains(&self, n: StatementId) -> bool {
        self.nodes.binary_search(&n).is_ok()
    }

    /// All edges, sorted.
    pub fn edges(&self) -> Vec<PdgEdge> {
        let mut out: Vec<PdgEdge> = self
            .control
            .iter()
            .map(|e| PdgEdge { src: e.from, dst: e.to, dep: Dependence::Control { label: e.label } })
            .chain(self.data.iter().map(|e| PdgEdge {
                src: e.from,
                dst: e.to,
                dep: Dependence::Data { var: e.var.clone() },
            }))
            .collect();
        out.sort();
        out
    }

    /// Adds an edge, keeping the edge lists sorted and duplicate-free.
    pub fn add_edge(&mut self, edge: PdgEdge) {
        match edge.dep {
            Dependence::Control { label } => {
                let e = ControlEdge { from: edge.src, to: edge.dst, label };
                if let Err(pos) = self.control.binary_search(&e) {
                    self.control.insert(pos, e);
                }
            }
            Dependence::Data { var } => {
                let e = DataEdge { from: edge.src, to: edge.dst, var };
                if let Err(pos) = self.data.binary_search(&e) {
                    self.data.insert(pos, e);
                }
            }
        }
    }

    /// Adjacency over statement nodes only (ENTRY sources are dropped).
    pub fn adjacency(&self) -> (BTreeMap<StatementId, Vec<StatementId>>, BTreeMap<StatementId, Vec<StatementId>>) {
        let mut fwd: BTreeMap<StatementId, Vec<StatementId>> = BTreeMap::new();
        let mut bwd: BTreeMap<StatementId, Vec<StatementId>> = BTreeMap::new();
        let pairs = self.control.iter().map(|e| (e.from, e.to)).chain(self.data.iter().map(|e| (e.from, e.to)));
        for (from, to) in pairs {
            if let NodeId::Stmt(src) = from {
                fwd.entry(src).or_default().push(to);
                bwd.entry(to).or_default().push(src);
            }
        }
        (fwd, bwd)
    }

    /// Graphviz rendering: solid edges for control, dashed for data.
    pub fn to_dot(&self, m: &MethodAst) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", escape_dot(&m.name));
        let _ = writeln!(out, "  node [shape=box];");
        let _ = writeln!(out, "  ENTRY [shape=ellipse];");
        for s in &m.statements {
            let _ = writeln!(out, "  {} [label=\"{}: {}\"];", s.id, s.id, escape_dot(&s.text));
        }
        for e in &self.control {
            match e.label {
                Some(l) => {
                    let _ = writeln!(out, "  {} -> {} [style=solid, label=\"{}\"];", e.from, e.to, l);
                }
                None => {
                    let _ = writeln!(out, "  {} -> {} [style=solid];", e.from, e.to);
                }
            }
        }
        for e in &self.data {
            let _ = writeln!(out, "  {} -> {} [style=dashed, label=\"{}\"];", e.from, e.to, escape_dot(&e.var));
        }
        out.push_str("}\n");
        out
    }
}

impl Cfg {
    pub fn to_dot(&self, m: &MethodAst) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}_cfg\" {{", escape_dot(&m.name));
        let _ = writeln!(out, "  node [shape=box];");
        let _ = writeln!(out, "  ENTRY [shape=ellipse];\n  EXIT [shape=ellipse];");
        for s in &m.statements {
            let _ = writeln!(out, "  {} [label=\"{}: {}\"];", s.id, s.id, escape_dot(&s.text));
        }
        let mut edges = self.edges().to_vec();
        edges.sort();
        for e in edges {
            match e.label {
                Some(l) => {
                    let _ = writeln!(out, "  {} -> {} [label=\"{}\"];", e.from, e.to, l);
                }
                None => {
                    let _ = writeln!(out, "  {} -> {};", e.from, e.to);
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn escape_dot(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// PDG of `m`: control dependences from post-dominance plus def-use edges
/// from reaching definitions, both over the same CFG.
pub fn build_pdg(m: &MethodAst) -> Result<Pdg, GraphError> {
    let cfg = build_cfg(m);
    let pdom = postdominators(&cfg)?;
    Ok(Pdg {
        nodes: m.statements.iter().map(|s| s.id).collect(),
        control: build_cdg(&cfg, &pdom),
        data: build_ddg(m, &cfg),
    })
}
