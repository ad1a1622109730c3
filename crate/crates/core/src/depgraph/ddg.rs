use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::cfg::Cfg;
use super::NodeId;
use crate::java::{collect_ingredients, IngredientSet, MethodAst, StatementId};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DataEdge {
    pub from: NodeId,
    pub to: StatementId,
    pub var: String,
}

/// Def/use sets per CFG node. Parameters are definitions at ENTRY.
pub fn def_use_sets(m: &MethodAst) -> BTreeMap<NodeId, IngredientSet> {
    let mut out = BTreeMap::new();
    let entry = IngredientSet { vars_defined: m.params.iter().map(|p| p.name.clone()).collect(), ..Default::default() };
    out.insert(NodeId::Entry, entry);
    for s in &m.statements {
        out.insert(NodeId::Stmt(s.id), collect_ingredients(s));
    }
    out
}

/// Reaching definitions over `g`, solved with a worklist to a fixpoint. A
/// definition of `v` at `d` reaches `u` when some CFG path from `d` to `u`
/// has no other definition of `v`; each such (def, use) pair is an edge.
pub fn build_ddg(m: &MethodAst, g: &Cfg) -> Vec<DataEdge> {
    reaching_definition_edges(g, &def_use_sets(m))
}

pub fn reaching_definition_edges(g: &Cfg, sets: &BTreeMap<NodeId, IngredientSet>) -> Vec<DataEdge> {
    let n = g.len();
    let empty = IngredientSet::default();
    let info: Vec<&IngredientSet> = (0..n).map(|i| sets.get(&g.node(i)).unwrap_or(&empty)).collect();

    // Definition sites, numbered.
    let mut sites: Vec<(usize, &str)> = Vec::new();
    for (i, set) in info.iter().enumerate() {
        for v in &set.vars_defined {
            sites.push((i, v.as_str()));
        }
    }
    let mut sites_by_var: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (k, (_, v)) in sites.iter().enumerate() {
        sites_by_var.entry(v).or_default().push(k);
    }

    let gen: Vec<BTreeSet<usize>> =
        (0..n).map(|i| sites.iter().enumerate().filter(|(_, s)| s.0 == i).map(|(k, _)| k).collect()).collect();
    let out_of = |i: usize, input: &BTreeSet<usize>| -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> =
            input.iter().copied().filter(|&k| !info[i].vars_defined.contains(sites[k].1)).collect();
        out.extend(gen[i].iter().copied());
        out
    };

    let mut ins: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut outs: Vec<BTreeSet<usize>> = (0..n).map(|i| gen[i].clone()).collect();
    let mut queue: VecDeque<usize> = (0..n).collect();
    let mut queued = vec![true; n];
    while let Some(i) = queue.pop_front() {
        queued[i] = false;
        let mut input = BTreeSet::new();
        for &p in g.pred_indices(i) {
            input.extend(outs[p].iter().copied());
        }
        let out = out_of(i, &input);
        ins[i] = input;
        if out != outs[i] {
            outs[i] = out;
            for &s in g.succ_indices(i) {
                if !queued[s] {
                    queued[s] = true;
                    queue.push_back(s);
                }
            }
        }
    }

    let mut edges = BTreeSet::new();
    for (u, set) in info.iter().enumerate() {
        let NodeId::Stmt(to) = g.node(u) else { continue };
        for v in &set.vars_used {
            let Some(candidates) = sites_by_var.get(v.as_str()) else { continue };
            for &k in candidates {
                if ins[u].contains(&k) {
                    edges.insert(DataEdge { from: g.node(sites[k].0), to, var: v.clone() });
                }
            }
        }
    }
    edges.into_iter().collect()
}
