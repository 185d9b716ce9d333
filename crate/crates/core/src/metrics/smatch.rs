//! Triple-graph F1 between formulas with a searched node alignment.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::syntax::{Formula, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Operator,
    Atom,
    Variable,
    Function,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Node(usize),
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub source: usize,
    pub label: String,
    pub target: Target,
}

/// Triples over mappable nodes `0..nodes.len()`; names and constants are
/// literal targets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TripleGraph {
    pub nodes: Vec<NodeKind>,
    pub triples: Vec<Triple>,
}

impl TripleGraph {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn mappable(&self) -> usize {
        self.nodes.len()
    }
}

impl fmt::Display for TripleGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.triples {
            match &t.target {
                Target::Node(n) => writeln!(f, "(n{}, {}, n{})", t.source, t.label, n)?,
                Target::Literal(s) => writeln!(f, "(n{}, {}, {:?})", t.source, t.label, s)?,
            }
        }
        Ok(())
    }
}

struct Builder {
    g: TripleGraph,
    scope: Vec<(String, usize)>,
    free: BTreeMap<String, usize>,
}

impl Builder {
    fn node(&mut self, kind: NodeKind) -> usize {
        self.g.nodes.push(kind);
        self.g.nodes.len() - 1
    }

    fn push(&mut self, source: usize, label: impl Into<String>, target: Target) {
        self.g.triples.push(Triple {
            source,
            label: label.into(),
            target,
        });
    }

    fn formula(&mut self, f: &Formula) -> usize {
        match f {
            Formula::Atom(name, args) => {
                let a = self.node(NodeKind::Atom);
                self.push(a, "pred", Target::Literal(name.clone()));
                self.args(a, args);
                a
            }
            Formula::ForAll(v, body) | Formula::Exists(v, body) => {
                let n = self.node(NodeKind::Operator);
                let op = f.operator().expect("quantifier").name();
                self.push(n, "op", Target::Literal(op.into()));
                let var = self.node(NodeKind::Variable);
                self.push(n, "binds", Target::Node(var));
                self.scope.push((v.clone(), var));
                let child = self.formula(body);
                self.scope.pop();
                self.push(n, "arg0", Target::Node(child));
                n
            }
            Formula::Equals(a, b) => {
                let n = self.node(NodeKind::Operator);
                self.push(n, "op", Target::Literal("equals".into()));
                self.args(n, &[a.clone(), b.clone()]);
                n
            }
            _ => {
                let n = self.node(NodeKind::Operator);
                let op = f.operator().expect("connective").name();
                self.push(n, "op", Target::Literal(op.into()));
                for (k, c) in f.children().into_iter().enumerate() {
                    let child = self.formula(c);
                    self.push(n, format!("arg{k}"), Target::Node(child));
                }
                n
            }
        }
    }

    fn args(&mut self, owner: usize, args: &[Term]) {
        for (k, t) in args.iter().enumerate() {
            let target = self.term(t);
            self.push(owner, format!("arg{k}"), target);
        }
    }

    fn term(&mut self, t: &Term) -> Target {
        match t {
            Term::Const(c) => Target::Literal(c.clone()),
            Term::Var(v) => {
                if let Some(&(_, id)) = self.scope.iter().rev().find(|(n, _)| n == v) {
                    return Target::Node(id);
                }
                if let Some(&id) = self.free.get(v) {
                    return Target::Node(id);
                }
                let id = self.node(NodeKind::Variable);
                self.free.insert(v.clone(), id);
                Target::Node(id)
            }
            Term::Func(name, args) => {
                let n = self.node(NodeKind::Function);
                self.push(n, "func", Target::Literal(name.clone()));
                self.args(n, args);
                Target::Node(n)
            }
        }
    }
}

/// Encodes `f` as triples. Operators emit `(n, op, name)` and `(n, argK,
/// child)`, quantifiers add `(n, binds, var)`, atoms emit `(a, pred, name)`
/// and `(a, argK, term)`, function terms emit `(t, func, name)` and `(t, argK,
/// term)`.
pub fn fol_to_triples(f: &Formula) -> TripleGraph {
    let mut b = Builder {
        g: TripleGraph::default(),
        scope: Vec::new(),
        free: BTreeMap::new(),
    };
    b.formula(f);
    b.g
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmatchConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Exhaustive search when the smaller graph has at most this many
    /// mappable nodes.
    pub exhaustive_limit: usize,
}

impl Default for SmatchConfig {
    fn default() -> Self {
        SmatchConfig {
            restarts: 4,
            seed: 17,
            exhaustive_limit: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    /// Pairs `(node in a, node in b)`.
    pub mapping: Vec<(usize, usize)>,
    pub matched: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub exhaustive: bool,
}

fn prf(matched: usize, a_len: usize, b_len: usize) -> (f64, f64, f64) {
    let p = if b_len == 0 { 0.0 } else { matched as f64 / b_len as f64 };
    let r = if a_len == 0 { 0.0 } else { matched as f64 / a_len as f64 };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

/// Triples of `b` keyed for lookup under a mapping.
struct Index<'a> {
    b: HashSet<(usize, &'a str, TargetRef<'a>)>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum TargetRef<'a> {
    Node(usize),
    Literal(&'a str),
}

impl<'a> Index<'a> {
    fn new(b: &'a TripleGraph) -> Self {
        Index {
            b: b.triples
                .iter()
                .map(|t| (t.source, t.label.as_str(), target_ref(&t.target)))
                .collect(),
        }
    }

    fn matches(&self, t: &Triple, map: &[Option<usize>]) -> bool {
        let Some(s) = map[t.source] else { return false };
        let target = match &t.target {
            Target::Node(n) => match map[*n] {
                Some(m) => TargetRef::Node(m),
                None => return false,
            },
            Target::Literal(l) => TargetRef::Literal(l),
        };
        self.b.contains(&(s, t.label.as_str(), target))
    }

    fn count(&self, a: &TripleGraph, map: &[Option<usize>]) -> usize {
        a.triples.iter().filter(|t| self.matches(t, map)).count()
    }
}

fn target_ref(t: &Target) -> TargetRef<'_> {
    match t {
        Target::Node(n) => TargetRef::Node(*n),
        Target::Literal(l) => TargetRef::Literal(l),
    }
}

fn result(
    a: &TripleGraph,
    b: &TripleGraph,
    map: &[Option<usize>],
    matched: usize,
    exhaustive: bool,
) -> AlignmentResult {
    let (precision, recall, f1) = prf(matched, a.len(), b.len());
    AlignmentResult {
        mapping: map.iter().enumerate().filter_map(|(i, m)| m.map(|j| (i, j))).collect(),
        matched,
        precision,
        recall,
        f1,
        exhaustive,
    }
}

fn nodes_by_kind(g: &TripleGraph) -> BTreeMap<NodeKind, Vec<usize>> {
    let mut m: BTreeMap<NodeKind, Vec<usize>> = BTreeMap::new();
    for (i, k) in g.nodes.iter().enumerate() {
        m.entry(*k).or_default().push(i);
    }
    m
}

/// Number of kind-preserving injections the exhaustive search may visit.
fn search_space(a: &TripleGraph, b: &TripleGraph) -> f64 {
    let bk = nodes_by_kind(b);
    nodes_by_kind(a)
        .iter()
        .map(|(k, an)| {
            let nb = bk.get(k).map_or(0, Vec::len) as f64;
            (0..an.len()).map(|i| (nb + 1.0 - i as f64).max(1.0)).product::<f64>()
        })
        .product()
}

/// Exact maximum of matched triples over all kind-preserving partial
/// injections from the nodes of `a` into the nodes of `b`.
pub fn align_exhaustive(a: &TripleGraph, b: &TripleGraph) -> AlignmentResult {
    let index = Index::new(b);
    let n = a.nodes.len();
    // a triple is decided once its last endpoint (in node order) is assigned
    let mut decided_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ti, t) in a.triples.iter().enumerate() {
        let last = match t.target {
            Target::Node(m) => t.source.max(m),
            Target::Literal(_) => t.source,
        };
        decided_at[last].push(ti);
    }
    let mut remaining = vec![0usize; n + 1];
    for i in (0..n).rev() {
        remaining[i] = remaining[i + 1] + decided_at[i].len();
    }
    let b_kind = nodes_by_kind(b);
    // a-nodes of each kind at or after position i
    let mut a_left: Vec<BTreeMap<NodeKind, usize>> = vec![BTreeMap::new(); n + 1];
    for i in (0..n).rev() {
        a_left[i] = a_left[i + 1].clone();
        *a_left[i].entry(a.nodes[i]).or_default() += 1;
    }

    struct Dfs<'a> {
        a: &'a TripleGraph,
        index: Index<'a>,
        decided_at: Vec<Vec<usize>>,
        remaining: Vec<usize>,
        b_kind: BTreeMap<NodeKind, Vec<usize>>,
        a_left: Vec<BTreeMap<NodeKind, usize>>,
        used: Vec<bool>,
        map: Vec<Option<usize>>,
        best: usize,
        best_map: Vec<Option<usize>>,
    }

    impl Dfs<'_> {
        fn gain(&self, i: usize) -> usize {
            self.decided_at[i]
                .iter()
                .filter(|&&ti| self.index.matches(&self.a.triples[ti], &self.map))
                .count()
        }

        fn run(&mut self, i: usize, matched: usize) {
            if matched > self.best || (matched == self.best && self.best_map.is_empty()) {
                self.best = matched;
                self.best_map = self.map.clone();
            }
            if i == self.map.len() || matched + self.remaining[i] <= self.best {
                return;
            }
            let kind = self.a.nodes[i];
            let cands: Vec<usize> = self
                .b_kind
                .get(&kind)
                .map(|v| v.iter().copied().filter(|&j| !self.used[j]).collect())
                .unwrap_or_default();
            for &j in &cands {
                self.used[j] = true;
                self.map[i] = Some(j);
                let g = self.gain(i);
                self.run(i + 1, matched + g);
                self.map[i] = None;
                self.used[j] = false;
            }
            // leaving a node unmapped only helps when its kind is oversubscribed
            if self.a_left[i][&kind] > cands.len() {
                self.run(i + 1, matched);
            }
        }
    }

    let mut dfs = Dfs {
        a,
        index,
        decided_at,
        remaining,
        b_kind,
        a_left,
        used: vec![false; b.nodes.len()],
        map: vec![None; n],
        best: 0,
        best_map: Vec::new(),
    };
    dfs.run(0, 0);
    let map = if dfs.best_map.is_empty() {
        vec![None; n]
    } else {
        dfs.best_map
    };
    result(a, b, &map, dfs.best, true)
}

/// Label of a node: its operator, predicate or function name.
fn node_labels(g: &TripleGraph) -> Vec<Option<&str>> {
    let mut labels = vec![None; g.nodes.len()];
    for t in &g.triples {
        if matches!(t.label.as_str(), "op" | "pred" | "func") {
            if let Target::Literal(l) = &t.target {
                labels[t.source] = Some(l.as_str());
            }
        }
    }
    labels
}

fn smart_init(a: &TripleGraph, b: &TripleGraph) -> Vec<Option<usize>> {
    let la = node_labels(a);
    let lb = node_labels(b);
    let mut used = vec![false; b.nodes.len()];
    let mut map = vec![None; a.nodes.len()];
    for i in 0..a.nodes.len() {
        if la[i].is_none() {
            continue;
        }
        if let Some(j) = (0..b.nodes.len()).find(|&j| !used[j] && b.nodes[j] == a.nodes[i] && lb[j] == la[i]) {
            used[j] = true;
            map[i] = Some(j);
        }
    }
    for (i, slot) in map.iter_mut().enumerate() {
        if slot.is_none() {
            if let Some(j) = (0..b.nodes.len()).find(|&j| !used[j] && b.nodes[j] == a.nodes[i]) {
                used[j] = true;
                *slot = Some(j);
            }
        }
    }
    map
}

fn random_init(a: &TripleGraph, b: &TripleGraph, rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
    let mut map = vec![None; a.nodes.len()];
    let bk = nodes_by_kind(b);
    for (kind, mut an) in nodes_by_kind(a) {
        let mut bn = bk.get(&kind).cloned().unwrap_or_default();
        bn.shuffle(rng);
        an.shuffle(rng);
        for (i, j) in an.into_iter().zip(bn) {
            map[i] = Some(j);
        }
    }
    map
}

fn climb(
    a: &TripleGraph,
    b: &TripleGraph,
    index: &Index<'_>,
    mut map: Vec<Option<usize>>,
) -> (usize, Vec<Option<usize>>) {
    let mut score = index.count(a, &map);
    let bk = nodes_by_kind(b);
    loop {
        let mut best: Option<(usize, Vec<Option<usize>>)> = None;
        let consider = |cand: Vec<Option<usize>>, best: &mut Option<(usize, Vec<Option<usize>>)>| {
            let s = index.count(a, &cand);
            if s > score && best.as_ref().is_none_or(|(bs, _)| s > *bs) {
                *best = Some((s, cand));
            }
        };
        let used: HashSet<usize> = map.iter().flatten().copied().collect();
        for i in 0..map.len() {
            let kind = a.nodes[i];
            // remap to an unused node of the same kind, or unmap
            for &j in bk.get(&kind).map(Vec::as_slice).unwrap_or(&[]) {
                if !used.contains(&j) {
                    let mut c = map.clone();
                    c[i] = Some(j);
                    consider(c, &mut best);
                }
            }
            if map[i].is_some() {
                let mut c = map.clone();
                c[i] = None;
                consider(c, &mut best);
            }
            for k in i + 1..map.len() {
                if a.nodes[k] == kind && map[i] != map[k] {
                    let mut c = map.clone();
                    c.swap(i, k);
                    consider(c, &mut best);
                }
            }
        }
        match best {
            Some((s, m)) => {
                score = s;
                map = m;
            }
            None => return (score, map),
        }
    }
}

/// Steepest-ascent search over remap and swap moves. Restart 0 starts from a
/// label-matching mapping, later restarts from seeded random mappings.
pub fn align_hill_climb(a: &TripleGraph, b: &TripleGraph, restarts: usize, seed: u64) -> AlignmentResult {
    let index = Index::new(b);
    let mut best: Option<(usize, Vec<Option<usize>>)> = None;
    for r in 0..restarts.max(1) {
        let init = if r == 0 {
            smart_init(a, b)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            random_init(a, b, &mut rng)
        };
        let (s, m) = climb(a, b, &index, init);
        if best.as_ref().is_none_or(|(bs, _)| s > *bs) {
            best = Some((s, m));
        }
    }
    let (s, m) = best.expect("at least one restart");
    result(a, b, &m, s, false)
}

/// Exhaustive search costs more than this many visited mappings fall back to
/// hill climbing even under the node limit.
const EXHAUSTIVE_SPACE_CAP: f64 = 5e7;

/// F1 of matched triples. `a` is the reference and `b` the candidate:
/// precision divides by `|b|`, recall by `|a|`.
///
/// The search always runs from the smaller graph, so the matched count is
/// symmetric in its arguments.
pub fn smatch_score(a: &TripleGraph, b: &TripleGraph, cfg: &SmatchConfig) -> AlignmentResult {
    let swap = (a.mappable(), a.len(), a.to_string()) > (b.mappable(), b.len(), b.to_string());
    let (x, y) = if swap { (b, a) } else { (a, b) };
    let use_exhaustive = x.mappable() <= cfg.exhaustive_limit && search_space(x, y) <= EXHAUSTIVE_SPACE_CAP;
    let r = if use_exhaustive {
        align_exhaustive(x, y)
    } else {
        align_hill_climb(x, y, cfg.restarts, cfg.seed)
    };
    let (precision, recall, f1) = prf(r.matched, a.len(), b.len());
    let mapping = if swap {
        r.mapping.iter().map(|&(i, j)| (j, i)).collect()
    } else {
        r.mapping
    };
    AlignmentResult {
        mapping,
        precision,
        recall,
        f1,
        ..r
    }
}

/// Smatch F1 between two formulas.
pub fn smatch_formulas(a: &Formula, b: &Formula, cfg: &SmatchConfig) -> AlignmentResult {
    smatch_score(&fol_to_triples(a), &fol_to_triples(b), cfg)
}
