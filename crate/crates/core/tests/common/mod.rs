//! Independent oracles shared by the integration suites.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use slicefix::depgraph::{Branch, NodeId, Pdg};
use slicefix::eval::BugType;
use slicefix::java::StatementId;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

// Random methods

pub const VARS: [&str; 4] = ["a", "b", "c", "d"];

#[derive(Debug, Clone)]
pub enum Shape {
    Simple { text: String, defs: Vec<&'static str>, uses: Vec<&'static str> },
    If { cond: (&'static str, &'static str), then: Vec<Shape>, els: Option<Vec<Shape>> },
    While { cond: (&'static str, &'static str), body: Vec<Shape> },
    Break,
    Return(&'static str),
}

pub type OracleEdge = (NodeId, NodeId, Option<Branch>);

/// A generated method plus everything the oracles need, derived from the
/// shape alone.
#[derive(Debug, Clone)]
pub struct GeneratedMethod {
    pub source: String,
    pub statements: usize,
    pub cfg: BTreeSet<OracleEdge>,
    pub defs: BTreeMap<NodeId, BTreeSet<String>>,
    pub uses: BTreeMap<NodeId, BTreeSet<String>>,
}

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).copied().expect("non-empty")
}

fn simple(rng: &mut ChaCha8Rng) -> Shape {
    let (x, y, z) = (pick(rng, &VARS), pick(rng, &VARS), pick(rng, &VARS));
    match rng.gen_range(0..5) {
        0 => Shape::Simple { text: format!("{x} = {y} + {z};"), defs: vec![x], uses: vec![y, z] },
        1 => Shape::Simple { text: format!("{x} = {};", rng.gen_range(0..9)), defs: vec![x], uses: vec![] },
        2 => Shape::Simple { text: format!("{x} += {y};"), defs: vec![x], uses: vec![x, y] },
        3 => Shape::Simple { text: format!("{x}++;"), defs: vec![x], uses: vec![x] },
        _ => Shape::Simple { text: format!("log({y}, {z});"), defs: vec![], uses: vec![y, z] },
    }
}

fn block(rng: &mut ChaCha8Rng, budget: &mut usize, depth: usize, in_loop: bool) -> Vec<Shape> {
    let mut out = Vec::new();
    let want = rng.gen_range(1..=3);
    while out.len() < want && *budget > 0 {
        *budget -= 1;
        let roll = if in_loop { rng.gen_range(0..6) } else { rng.gen_range(0..10) };
        if roll < 2 && depth < 3 && *budget > 0 {
            let cond = (pick(rng, &VARS), pick(rng, &VARS));
            let mut then = block(rng, budget, depth + 1, in_loop);
            if in_loop && *budget > 0 && rng.gen_bool(0.7) {
                *budget -= 1;
                then.push(Shape::Break);
            }
            let els =
                if *budget > 0 && rng.gen_bool(0.5) { Some(block(rng, budget, depth + 1, in_loop)) } else { None };
            if then.is_empty() {
                out.push(simple(rng));
                continue;
            }
            out.push(Shape::If { cond, then, els: els.filter(|e| !e.is_empty()) });
        } else if roll < 4 && depth < 3 && *budget > 0 {
            let cond = (pick(rng, &VARS), pick(rng, &VARS));
            let body = block(rng, budget, depth + 1, true);
            if body.is_empty() {
                out.push(simple(rng));
                continue;
            }
            out.push(Shape::While { cond, body });
        } else {
            out.push(simple(rng));
        }
    }
    out
}

pub fn random_method(seed: u64) -> GeneratedMethod {
    let mut rng = rng(seed);
    let mut budget = rng.gen_range(2..=9usize);
    let mut body = block(&mut rng, &mut budget, 0, false);
    if body.is_empty() {
        body.push(simple(&mut rng));
    }
    let returns = rng.gen_bool(0.5);
    if returns {
        body.push(Shape::Return(pick(&mut rng, &VARS)));
    }
    let mut b = Builder::default();
    b.lines.push(format!("{} m(int a, int b, int c, int d) {{", if returns { "int" } else { "void" }));
    b.defs.insert(NodeId::Entry, VARS.iter().map(|v| v.to_string()).collect());
    let mut breaks = Vec::new();
    let outs = b.lower(&body, vec![(NodeId::Entry, None)], 1, &mut breaks);
    for (n, l) in outs {
        b.cfg.insert((n, NodeId::Exit, l));
    }
    b.lines.push("}".into());
    GeneratedMethod { source: b.lines.join("\n"), statements: b.next as usize, cfg: b.cfg, defs: b.defs, uses: b.uses }
}

#[derive(Default)]
struct Builder {
    lines: Vec<String>,
    next: u32,
    cfg: BTreeSet<OracleEdge>,
    defs: BTreeMap<NodeId, BTreeSet<String>>,
    uses: BTreeMap<NodeId, BTreeSet<String>>,
}

type Pending = Vec<(NodeId, Option<Branch>)>;

impl Builder {
    fn stmt(&mut self, indent: usize, text: String, defs: &[&str], uses: &[&str], preds: Pending) -> NodeId {
        let n = NodeId::Stmt(StatementId(self.next));
        self.next += 1;
        self.lines.push(format!("{}{}", "    ".repeat(indent), text));
        self.defs.insert(n, defs.iter().map(|s| s.to_string()).collect());
        self.uses.insert(n, uses.iter().map(|s| s.to_string()).collect());
        for (p, l) in preds {
            self.cfg.insert((p, n, l));
        }
        n
    }

    fn close(&mut self, indent: usize, text: &str) {
        self.lines.push(format!("{}{}", "    ".repeat(indent), text));
    }

    fn lower(&mut self, shapes: &[Shape], mut preds: Pending, indent: usize, breaks: &mut Pending) -> Pending {
        for s in shapes {
            preds = match s {
                Shape::Simple { text, defs, uses } => {
                    let n = self.stmt(indent, text.clone(), defs, uses, preds);
                    vec![(n, None)]
                }
                Shape::If { cond, then, els } => {
                    let n =
                        self.stmt(indent, format!("if ({} > {}) {{", cond.0, cond.1), &[], &[cond.0, cond.1], preds);
                    let mut out = self.lower(then, vec![(n, Some(Branch::True))], indent + 1, breaks);
                    match els {
                        Some(e) => {
                            self.close(indent, "} else {");
                            out.extend(self.lower(e, vec![(n, Some(Branch::False))], indent + 1, breaks));
                        }
                        None => out.push((n, Some(Branch::False))),
                    }
                    self.close(indent, "}");
                    out
                }
                Shape::While { cond, body } => {
                    let n =
                        self.stmt(indent, format!("while ({} < {}) {{", cond.0, cond.1), &[], &[cond.0, cond.1], preds);
                    let mut inner = Vec::new();
                    let outs = self.lower(body, vec![(n, Some(Branch::True))], indent + 1, &mut inner);
                    for (p, l) in outs {
                        self.cfg.insert((p, n, l));
                    }
                    self.close(indent, "}");
                    let mut out = vec![(n, Some(Branch::False))];
                    out.extend(inner);
                    out
                }
                Shape::Break => {
                    let n = self.stmt(indent, "break;".into(), &[], &[], preds);
                    breaks.push((n, None));
                    vec![]
                }
                Shape::Return(v) => {
                    let n = self.stmt(indent, format!("return {v};"), &[], &[v], preds);
                    self.cfg.insert((n, NodeId::Exit, None));
                    vec![]
                }
            };
        }
        preds
    }
}

// Graph oracles

pub struct Graph {
    pub nodes: Vec<NodeId>,
    pub succ: BTreeMap<NodeId, Vec<(NodeId, Option<Branch>)>>,
}

impl Graph {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>, edges: &BTreeSet<OracleEdge>) -> Self {
        let nodes: Vec<NodeId> = nodes.into_iter().collect();
        let mut succ: BTreeMap<NodeId, Vec<(NodeId, Option<Branch>)>> = nodes.iter().map(|n| (*n, vec![])).collect();
        for &(a, b, l) in edges {
            succ.entry(a).or_default().push((b, l));
        }
        Graph { nodes, succ }
    }

    fn reaches(&self, from: NodeId, to: NodeId, removed: Option<NodeId>) -> bool {
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(n) = queue.pop_front() {
            if n == to {
                return true;
            }
            for &(m, _) in &self.succ[&n] {
                if Some(m) != removed && seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        false
    }

    /// `y` post-dominates `x`: every path from `x` to EXIT passes `y`.
    pub fn post_dominates(&self, y: NodeId, x: NodeId) -> bool {
        x == y || y == NodeId::Exit || !self.reaches(x, NodeId::Exit, Some(y))
    }

    /// Control dependence straight from the definition: `y` depends on `x`
    /// via edge `x→z` when a path from `z` to `y` runs only through nodes
    /// `y` post-dominates, and `y` does not strictly post-dominate `x`.
    /// Statements with no controller depend on ENTRY.
    pub fn control_dependences(&self) -> BTreeSet<(NodeId, StatementId, Option<Branch>)> {
        let pd: HashMap<(NodeId, NodeId), bool> = self
            .nodes
            .iter()
            .flat_map(|&y| self.nodes.iter().map(move |&x| (y, x)))
            .map(|(y, x)| ((y, x), self.post_dominates(y, x)))
            .collect();
        let mut out = BTreeSet::new();
        for &x in &self.nodes {
            if x == NodeId::Exit {
                continue;
            }
            for &y in &self.nodes {
                let NodeId::Stmt(yid) = y else { continue };
                if x != y && pd[&(y, x)] {
                    continue;
                }
                for &(z, l) in &self.succ[&x] {
                    let mut seen = BTreeSet::new();
                    let mut queue = VecDeque::new();
                    if pd[&(y, z)] {
                        seen.insert(z);
                        queue.push_back(z);
                    }
                    let mut found = false;
                    while let Some(w) = queue.pop_front() {
                        if w == y {
                            found = true;
                            break;
                        }
                        for &(v, _) in &self.succ[&w] {
                            if pd[&(y, v)] && seen.insert(v) {
                                queue.push_back(v);
                            }
                        }
                    }
                    if found {
                        out.insert((x, yid, l));
                    }
                }
            }
        }
        let controlled: BTreeSet<StatementId> = out.iter().map(|e| e.1).collect();
        for &n in &self.nodes {
            if let NodeId::Stmt(id) = n {
                if !controlled.contains(&id) {
                    out.insert((NodeId::Entry, id, None));
                }
            }
        }
        out
    }

    /// Def-use pairs from the path definition of reaching definitions: a
    /// definition of `v` at `d` reaches `u` along some path whose interior
    /// never redefines `v`.
    pub fn reaching_definitions(
        &self,
        defs: &BTreeMap<NodeId, BTreeSet<String>>,
        uses: &BTreeMap<NodeId, BTreeSet<String>>,
    ) -> BTreeSet<(NodeId, StatementId, String)> {
        let mut out = BTreeSet::new();
        for (&d, vars) in defs {
            for v in vars {
                let mut seen = BTreeSet::new();
                let mut queue: VecDeque<NodeId> = self.succ[&d].iter().map(|e| e.0).collect();
                while let Some(w) = queue.pop_front() {
                    if !seen.insert(w) {
                        continue;
                    }
                    if let NodeId::Stmt(id) = w {
                        if uses.get(&w).is_some_and(|u| u.contains(v)) {
                            out.insert((d, id, v.clone()));
                        }
                    }
                    if defs.get(&w).is_some_and(|s| s.contains(v)) {
                        continue;
                    }
                    queue.extend(self.succ[&w].iter().map(|e| e.0));
                }
            }
        }
        out
    }
}

/// Statements reachable from `n` forward plus those reaching `n`, over all
/// dependence edges, excluding `n`.
pub fn slice_by_bfs(pdg: &Pdg, n: StatementId) -> BTreeSet<StatementId> {
    let edges: Vec<(NodeId, NodeId)> = pdg.edges().iter().map(|e| (e.src, NodeId::Stmt(e.dst))).collect();
    let bfs = |forward: bool| {
        let start = NodeId::Stmt(n);
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &(a, b) in &edges {
                let (from, to) = if forward { (a, b) } else { (b, a) };
                if from == x && seen.insert(to) {
                    queue.push_back(to);
                }
            }
        }
        seen
    };
    bfs(true)
        .into_iter()
        .chain(bfs(false))
        .filter_map(|x| match x {
            NodeId::Stmt(id) if id != n => Some(id),
            _ => None,
        })
        .collect()
}

// Filter scenarios

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Buggy,
    Fixed,
    Other,
}

/// Three replay tables over a handful of bugs, each candidate tagged with
/// its class.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub buggy: BTreeMap<String, String>,
    pub fixed: BTreeMap<String, String>,
    pub tables: Vec<BTreeMap<String, Vec<(String, Class)>>>,
}

fn render(class: Class, bug: usize, variant: usize) -> String {
    match (class, variant % 2) {
        (Class::Buggy, 0) => format!("x = {bug} ;"),
        (Class::Buggy, _) => format!("x={bug};"),
        (Class::Fixed, 0) => format!("x = {bug} + 1 ;"),
        (Class::Fixed, _) => format!("x={bug}+1 ;"),
        (Class::Other, _) => format!("y = {bug} * {variant} ;"),
    }
}

pub fn random_scenario(rng: &mut ChaCha8Rng, generators: usize, max_len: usize) -> Scenario {
    let bugs = rng.gen_range(1..=12);
    let mut s = Scenario { buggy: BTreeMap::new(), fixed: BTreeMap::new(), tables: vec![BTreeMap::new(); generators] };
    for b in 0..bugs {
        let id = format!("bug{b}");
        s.buggy.insert(id.clone(), render(Class::Buggy, b, 0));
        s.fixed.insert(id.clone(), render(Class::Fixed, b, 0));
        for t in s.tables.iter_mut() {
            let len = rng.gen_range(0..=max_len);
            let list = (0..len)
                .map(|_| {
                    let class = match rng.gen_range(0..10) {
                        0..=2 => Class::Buggy,
                        3..=4 => Class::Fixed,
                        _ => Class::Other,
                    };
                    let variant = rng.gen_range(0..4);
                    (render(class, b, variant), class)
                })
                .collect();
            t.insert(id.clone(), list);
        }
    }
    s
}

/// Bugs fixed at k=1 under route-bug, from the set formula
/// CP1 ∪ (UP1 ∩ (CP2 ∪ (UP2 ∩ CP3))), generalized right to left.
pub fn route_bug_oracle(s: &Scenario) -> BTreeSet<String> {
    let first = |t: &BTreeMap<String, Vec<(String, Class)>>, c: Class| -> BTreeSet<String> {
        t.iter().filter(|(_, l)| l.first().map(|x| x.1) == Some(c)).map(|(id, _)| id.clone()).collect()
    };
    let n = s.tables.len();
    let mut acc = first(&s.tables[n - 1], Class::Fixed);
    for t in s.tables[..n - 1].iter().rev() {
        let cp = first(t, Class::Fixed);
        let up = first(t, Class::Buggy);
        acc = cp.union(&up.intersection(&acc).cloned().collect()).cloned().collect();
    }
    acc
}

// Edit scripts

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Insert,
    Delete,
    Replace,
}

/// Every kind set realized by some script of minimal (cost, indels),
/// by set-valued recursion over all alignments.
pub fn minimal_kind_sets(a: &[String], b: &[String]) -> BTreeSet<BTreeSet<Kind>> {
    type Best = ((usize, usize), BTreeSet<BTreeSet<Kind>>);
    fn go(a: &[String], b: &[String], i: usize, j: usize, memo: &mut HashMap<(usize, usize), Best>) -> Best {
        if let Some(v) = memo.get(&(i, j)) {
            return v.clone();
        }
        let result = if i == a.len() && j == b.len() {
            ((0, 0), BTreeSet::from([BTreeSet::new()]))
        } else {
            let mut options: Vec<((usize, usize), Option<Kind>, (usize, usize))> = Vec::new();
            if i < a.len() && j < b.len() {
                if a[i] == b[j] {
                    options.push(((0, 0), None, (i + 1, j + 1)));
                } else {
                    options.push(((1, 0), Some(Kind::Replace), (i + 1, j + 1)));
                }
            }
            if i < a.len() {
                options.push(((1, 1), Some(Kind::Delete), (i + 1, j)));
            }
            if j < b.len() {
                options.push(((1, 1), Some(Kind::Insert), (i, j + 1)));
            }
            let mut best: Option<Best> = None;
            for (step, kind, (ni, nj)) in options {
                let ((c, d), sets) = go(a, b, ni, nj, memo);
                let cost = (c + step.0, d + step.1);
                let sets: BTreeSet<BTreeSet<Kind>> = sets
                    .into_iter()
                    .map(|mut s| {
                        s.extend(kind);
                        s
                    })
                    .collect();
                best = match best {
                    None => Some((cost, sets)),
                    Some((bc, bs)) if cost < bc => {
                        let _ = bs;
                        Some((cost, sets))
                    }
                    Some((bc, mut bs)) if cost == bc => {
                        bs.extend(sets);
                        Some((bc, bs))
                    }
                    keep => keep,
                };
            }
            best.expect("at least one option")
        };
        memo.insert((i, j), result.clone());
        result
    }
    go(a, b, 0, 0, &mut HashMap::new()).1
}

pub fn bug_type_of(kinds: &BTreeSet<Kind>) -> BugType {
    match kinds.iter().copied().collect::<Vec<_>>().as_slice() {
        [Kind::Insert] => BugType::SimpleInsert,
        [Kind::Delete] => BugType::SimpleDelete,
        [Kind::Replace] => BugType::SimpleReplace,
        _ => BugType::Mixed,
    }
}

/// A token pair built by one kind of edit (or a replace combined with a
/// length change), labeled by construction.
pub fn synthesize_pair(rng: &mut ChaCha8Rng, label: BugType) -> (Vec<String>, Vec<String>) {
    let n = rng.gen_range(3..=10);
    let buggy: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
    let mut fresh = (0..).map(|i| format!("f{i}"));
    let mut fixed: Vec<Option<String>> = buggy.iter().cloned().map(Some).collect();
    let mut positions: Vec<usize> = (0..n).collect();
    positions.shuffle(rng);
    let edits = rng.gen_range(1..=2.min(n - 1));
    let mut inserts: Vec<(usize, String)> = Vec::new();
    let replace = |fixed: &mut Vec<Option<String>>, p: usize, fresh: &mut dyn Iterator<Item = String>| {
        fixed[p] = fresh.next();
    };
    match label {
        BugType::SimpleReplace => {
            for &p in &positions[..edits] {
                replace(&mut fixed, p, &mut fresh);
            }
        }
        BugType::SimpleDelete => {
            for &p in &positions[..edits] {
                fixed[p] = None;
            }
        }
        BugType::SimpleInsert => {
            for _ in 0..edits {
                inserts.push((rng.gen_range(0..=n), fresh.next().unwrap()));
            }
        }
        BugType::Mixed => {
            replace(&mut fixed, positions[0], &mut fresh);
            if rng.gen_bool(0.5) {
                fixed[positions[1]] = None;
            } else {
                inserts.push((rng.gen_range(0..=n), fresh.next().unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    for (i, t) in fixed.into_iter().enumerate() {
        for (_, f) in inserts.iter().filter(|(at, _)| *at == i) {
            out.push(f.clone());
        }
        out.extend(t);
    }
    for (_, f) in inserts.iter().filter(|(at, _)| *at == n) {
        out.push(f.clone());
    }
    (buggy, out)
}

// Whole-method checks

/// Compares the library's CFG, post-dominators, CDG and DDG for one
/// generated method against the oracles; returns every discrepancy.
pub fn dataflow_discrepancies(g: &GeneratedMethod) -> Vec<String> {
    use slicefix::depgraph::{build_cdg, build_cfg, build_ddg, postdominators};
    use slicefix::java::parse_method;

    let mut errs = Vec::new();
    let m = match parse_method(&g.source) {
        Ok(m) => m,
        Err(e) => return vec![format!("parse failed: {e:?}\n{}", g.source)],
    };
    if m.statements.len() != g.statements {
        errs.push(format!("{} statements parsed, {} generated", m.statements.len(), g.statements));
        return errs;
    }
    let cfg = build_cfg(&m);
    let got: BTreeSet<OracleEdge> = cfg.edges().iter().map(|e| (e.from, e.to, e.label)).collect();
    if got != g.cfg {
        errs.push(format!(
            "cfg: extra {:?} missing {:?}",
            got.difference(&g.cfg).collect::<Vec<_>>(),
            g.cfg.difference(&got).collect::<Vec<_>>()
        ));
    }
    let graph = Graph::new(cfg.nodes().iter().copied(), &g.cfg);
    let pdom = postdominators(&cfg).expect("exit reachable");
    for &x in &graph.nodes {
        for &y in &graph.nodes {
            if pdom.post_dominates(y, x) != graph.post_dominates(y, x) {
                errs.push(format!("pdom({y}, {x}) disagrees"));
            }
        }
    }
    let cdg: BTreeSet<(NodeId, StatementId, Option<Branch>)> =
        build_cdg(&cfg, &pdom).into_iter().map(|e| (e.from, e.to, e.label)).collect();
    let want = graph.control_dependences();
    if cdg != want {
        errs.push(format!(
            "cdg: extra {:?} missing {:?}",
            cdg.difference(&want).collect::<Vec<_>>(),
            want.difference(&cdg).collect::<Vec<_>>()
        ));
    }
    let ddg: BTreeSet<(NodeId, StatementId, String)> =
        build_ddg(&m, &cfg).into_iter().map(|e| (e.from, e.to, e.var)).collect();
    let want = graph.reaching_definitions(&g.defs, &g.uses);
    if ddg != want {
        errs.push(format!(
            "ddg: extra {:?} missing {:?}",
            ddg.difference(&want).collect::<Vec<_>>(),
            want.difference(&ddg).collect::<Vec<_>>()
        ));
    }
    if !errs.is_empty() {
        errs.push(g.source.clone());
    }
    errs
}

/// Slice of every statement against BFS over the method's PDG.
pub fn slice_discrepancies(g: &GeneratedMethod) -> Vec<String> {
    use slicefix::depgraph::build_pdg;
    use slicefix::java::parse_method;
    use slicefix::slicer::bidirectional_slice;

    let Ok(m) = parse_method(&g.source) else { return vec!["parse failed".into()] };
    let pdg = build_pdg(&m).expect("graph builds");
    m.statements
        .iter()
        .filter_map(|s| {
            let got = bidirectional_slice(&pdg, s.id).expect("known statement");
            let want = slice_by_bfs(&pdg, s.id);
            (got != want).then(|| format!("slice of {}: got {got:?}, want {want:?}\n{}", s.id, g.source))
        })
        .collect()
}

/// Runs a scenario through replay generators under `policy`.
pub fn run_scenario(s: &Scenario, k: usize, policy: slicefix::filter::Policy) -> slicefix::filter::EnsembleResult {
    use slicefix::encoder::{encode_input, EncodedInstance};
    use slicefix::filter::run_pipeline;
    use slicefix::generators::{PatchGenerator, ReplayGenerator};
    use slicefix::slicer::{SliceContext, SlicedStatement};

    let gens: Vec<ReplayGenerator> = s
        .tables
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let table = t.iter().map(|(id, l)| (id.clone(), l.iter().map(|c| c.0.clone()).collect())).collect();
            ReplayGenerator::from_table(format!("g{}", i + 1), table)
        })
        .collect();
    let refs: Vec<&dyn PatchGenerator> = gens.iter().map(|g| g as &dyn PatchGenerator).collect();
    let instances: Vec<EncodedInstance> = s
        .buggy
        .iter()
        .map(|(id, b)| {
            let ctx = SliceContext {
                buggy: SlicedStatement { id: StatementId(0), line: 1, text: b.clone() },
                intra: vec![],
                global: vec![],
            };
            EncodedInstance { id: id.clone(), input: encode_input(&ctx, 64).unwrap() }
        })
        .collect();
    run_pipeline(&refs, &instances, k, policy)
}

/// Class of `text` for bug `id`, by lookup in the scenario tables.
pub fn class_of(s: &Scenario, id: &str, text: &str) -> Class {
    s.tables
        .iter()
        .flat_map(|t| t[id].iter())
        .find(|(t, _)| t == text)
        .map(|c| c.1)
        .expect("candidate comes from a table")
}

/// 1-based rank of the first fixed-class entry.
pub fn first_fixed(list: &[(String, Class)]) -> Option<usize> {
    list.iter().position(|c| c.1 == Class::Fixed).map(|p| p + 1)
}

// Slice contexts

const CODE_TOKENS: &[&str] = &[
    "x",
    "y",
    "count",
    "<",
    "<=",
    "<<",
    ">",
    "=",
    "==",
    "(",
    ")",
    "{",
    "}",
    ";",
    ".",
    ",",
    "+",
    "1",
    "42",
    "\"d/\"",
    "\"a < b\"",
    "'<'",
    "List",
    "get",
    "new",
    "return",
    "if",
];

fn code_text(rng: &mut ChaCha8Rng, min: usize, max: usize) -> String {
    let n = rng.gen_range(min..=max);
    (0..n).map(|_| *CODE_TOKENS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// A context with normalized texts: tokens joined by single spaces.
pub fn random_context(rng: &mut ChaCha8Rng) -> slicefix::slicer::SliceContext {
    use slicefix::slicer::{GlobalItem, SliceContext, SlicedStatement};

    let lines = rng.gen_range(1..=12usize);
    let buggy_line = rng.gen_range(1..=lines);
    let mut intra = Vec::new();
    for (i, line) in (1..=lines).filter(|&l| l != buggy_line).enumerate() {
        if rng.gen_bool(0.6) {
            intra.push(SlicedStatement { id: StatementId(i as u32), line, text: code_text(rng, 1, 8) });
        }
    }
    let global = (0..rng.gen_range(0..4))
        .map(|i| {
            if rng.gen_bool(0.5) {
                GlobalItem::Field { name: format!("F{i}"), declaration: code_text(rng, 1, 6) }
            } else {
                GlobalItem::Method { name: format!("m{i}"), arity: 1, signature: code_text(rng, 1, 6) }
            }
        })
        .collect();
    SliceContext {
        buggy: SlicedStatement { id: StatementId(99), line: buggy_line, text: code_text(rng, 1, 10) },
        intra,
        global,
    }
}

// Corpora

pub fn bug(id: &str, repo: &str) -> slicefix::corpus::BugInstance {
    slicefix::corpus::BugInstance {
        id: id.into(),
        repo: repo.into(),
        class_source: None,
        method_source: "void f() {\n go();\n}".into(),
        buggy_line: 1,
        fixed_line: "stop();".into(),
        benchmark: slicefix::corpus::Benchmark::Bfp,
    }
}

/// `repos` repositories of 1..=max_size bugs each.
pub fn repo_corpus(rng: &mut ChaCha8Rng, repos: usize, max_size: usize) -> Vec<slicefix::corpus::BugInstance> {
    (0..repos)
        .flat_map(|r| {
            let n = rng.gen_range(1..=max_size);
            (0..n).map(move |i| bug(&format!("r{r}-{i}"), &format!("org/repo{r}")))
        })
        .collect()
}

/// Empty when the split keeps repositories disjoint and the shares within
/// `tol` of the ratios.
pub fn split_violations(
    corpus: &[slicefix::corpus::BugInstance],
    split: &slicefix::corpus::CorpusSplit,
    ratios: [f64; 3],
    tol: f64,
) -> Vec<String> {
    let repo_of: BTreeMap<&str, &str> = corpus.iter().map(|b| (b.id.as_str(), b.repo.as_str())).collect();
    let mut errs = Vec::new();
    let sets: Vec<BTreeSet<&str>> =
        split.parts().iter().map(|ids| ids.iter().map(|id| repo_of[id.as_str()]).collect()).collect();
    for i in 0..3 {
        for j in i + 1..3 {
            let shared: Vec<_> = sets[i].intersection(&sets[j]).collect();
            if !shared.is_empty() {
                errs.push(format!("splits {i} and {j} share {shared:?}"));
            }
        }
    }
    let total: usize = split.parts().iter().map(|p| p.len()).sum();
    if total != corpus.len() {
        errs.push(format!("{total} assigned of {}", corpus.len()));
    }
    for (i, p) in split.parts().iter().enumerate() {
        let share = p.len() as f64 / corpus.len() as f64;
        if (share - ratios[i]).abs() > tol {
            errs.push(format!("split {i} share {share:.4} vs {}", ratios[i]));
        }
    }
    errs
}

// Reports

/// Fix@k counts never decrease in k; ratio(i,i) is 1 for non-empty CPi;
/// unique counts never exceed correct counts.
pub fn report_identity_violations(r: &slicefix::eval::EvalReport) -> Vec<String> {
    let mut errs = Vec::new();
    for m in &r.models {
        if m.fix_at_k.windows(2).any(|w| w[1].fixed < w[0].fixed || w[1].rate < w[0].rate) {
            errs.push(format!("{}: Fix@k not monotone", m.name));
        }
        if m.fix_at_k.iter().any(|f| f.total != r.bugs) {
            errs.push(format!("{}: wrong denominator", m.name));
        }
    }
    let o = &r.overlap;
    for i in 0..o.models.len() {
        if o.correct[i] > 0 && o.ratio[i][i] != 1.0 {
            errs.push(format!("ratio({0},{0}) = {1}", o.models[i], o.ratio[i][i]));
        }
        if o.unique[i] > o.correct[i] {
            errs.push(format!("{}: unique {} > correct {}", o.models[i], o.unique[i], o.correct[i]));
        }
        if o.correct[i] != r.models[i].correct.len() {
            errs.push(format!("{}: correct count mismatch", o.models[i]));
        }
    }
    errs
}

/// Random runs over random truth, for report-level identities.
pub fn random_report(rng: &mut ChaCha8Rng, k: usize) -> slicefix::eval::EvalReport {
    use slicefix::eval::{build_report, MatchMode, ModelRun, Truth};

    let bugs = rng.gen_range(1..15);
    let truth: BTreeMap<String, Truth> = (0..bugs)
        .map(|i| (format!("b{i}"), Truth { buggy: format!("x = {i} ;"), fixed: format!("x = {} ;", i + 1) }))
        .collect();
    let mut runs = Vec::new();
    for m in 0..rng.gen_range(1..4) {
        let mut lists = BTreeMap::new();
        for (id, t) in &truth {
            if !rng.gen_bool(0.8) {
                continue;
            }
            let n = rng.gen_range(0..12);
            let list: Vec<String> =
                (0..n).map(|j| if rng.gen_bool(0.15) { t.fixed.clone() } else { format!("z = {j} ;") }).collect();
            lists.insert(id.clone(), list);
        }
        runs.push(ModelRun { name: format!("m{m}"), lists, unprocessed: BTreeSet::new() });
    }
    build_report(&runs, &truth, k, MatchMode::Token).expect("valid")
}
