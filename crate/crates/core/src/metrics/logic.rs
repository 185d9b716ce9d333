//! Logical equivalence as agreement of truth values over finite interpretations.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{parse_str, Formula, SyntaxError, Term};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeConfig {
    pub domain_size: usize,
    /// Enumerate exhaustively when the ground-atom count is at most this.
    pub exhaustive_atom_limit: usize,
    pub sample_count: usize,
    pub seed: u64,
    pub predicate_align_threshold: f64,
}

impl Default for LeConfig {
    fn default() -> Self {
        LeConfig {
            domain_size: 3,
            exhaustive_atom_limit: 16,
            sample_count: 2048,
            seed: 17,
            predicate_align_threshold: 0.5,
        }
    }
}

/// Upper bound on exhaustively enumerated interpretations (truth tables
/// times constant assignments). Larger spaces are sampled.
pub const MAX_EXHAUSTIVE_INTERPRETATIONS: u64 = 1 << 20;

const MAX_GROUND_ATOMS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LeError {
    #[error("invalid config: {0}")]
    InvalidConfig(&'static str),
    #[error("formula fails the syntax check: {0}")]
    SyntaxInvalid(#[from] SyntaxIssue),
    #[error("grounding over domain size {domain_size} is too large")]
    GroundingOverflow { domain_size: usize },
}

impl LeConfig {
    pub fn validate(&self) -> Result<(), LeError> {
        if self.domain_size < 1 {
            return Err(LeError::InvalidConfig("domain_size must be >= 1"));
        }
        if self.sample_count < 1 {
            return Err(LeError::InvalidConfig("sample_count must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.predicate_align_threshold) {
            return Err(LeError::InvalidConfig("predicate_align_threshold must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxIssue {
    #[error(transparent)]
    Parse(#[from] SyntaxError),
    #[error("quantified variable {var:?} does not occur in its body")]
    UnusedQuantifiedVariable { var: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntaxCheck {
    pub valid: bool,
    pub error: Option<SyntaxIssue>,
    pub formula: Option<Formula>,
}

/// Parses `source` and checks that every quantifier binds a variable used
/// in its body.
pub fn syntax_check(source: &str) -> SyntaxCheck {
    match parse_str(source) {
        Err(e) => SyntaxCheck {
            valid: false,
            error: Some(e.into()),
            formula: None,
        },
        Ok(f) => {
            let error = check_formula(&f).err();
            SyntaxCheck {
                valid: error.is_none(),
                error,
                formula: Some(f),
            }
        }
    }
}

pub fn check_formula(f: &Formula) -> Result<(), SyntaxIssue> {
    let mut issue = None;
    f.visit(&mut |g| {
        if issue.is_some() {
            return;
        }
        if let Formula::ForAll(v, body) | Formula::Exists(v, body) = g {
            if !occurs_free(v, body) {
                issue = Some(SyntaxIssue::UnusedQuantifiedVariable { var: v.clone() });
            }
        }
    });
    issue.map_or(Ok(()), Err)
}

fn term_mentions(var: &str, t: &Term) -> bool {
    match t {
        Term::Var(n) => n == var,
        Term::Const(_) => false,
        Term::Func(_, args) => args.iter().any(|a| term_mentions(var, a)),
    }
}

/// Whether `var` occurs free in `f`.
pub fn occurs_free(var: &str, f: &Formula) -> bool {
    match f {
        Formula::ForAll(v, body) | Formula::Exists(v, body) => v != var && occurs_free(var, body),
        Formula::Atom(_, args) => args.iter().any(|t| term_mentions(var, t)),
        Formula::Equals(a, b) => term_mentions(var, a) || term_mentions(var, b),
        _ => f.children().into_iter().any(|c| occurs_free(var, c)),
    }
}

/// Greedy predicate alignment: candidate `(name, arity)` to gold name, by
/// normalized Levenshtein similarity, highest first, ties broken by name.
type Symbol = (String, usize);

pub fn align_predicates(gold: &Formula, cand: &Formula, threshold: f64) -> BTreeMap<Symbol, String> {
    let g = predicate_symbols(gold);
    let c = predicate_symbols(cand);
    let mut pairs: Vec<(f64, &Symbol, &Symbol)> = Vec::new();
    for gs in &g {
        for cs in &c {
            if gs.1 == cs.1 {
                let sim = strsim::normalized_levenshtein(&gs.0, &cs.0);
                if sim >= threshold {
                    pairs.push((sim, gs, cs));
                }
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| a.1.cmp(b.1))
            .then_with(|| a.2.cmp(b.2))
    });
    let mut used_g = BTreeSet::new();
    let mut out = BTreeMap::new();
    for (_, gs, cs) in pairs {
        if !used_g.contains(gs) && !out.contains_key(cs) {
            used_g.insert(gs.clone());
            out.insert(cs.clone(), gs.0.clone());
        }
    }
    out
}

fn predicate_symbols(f: &Formula) -> BTreeSet<(String, usize)> {
    f.atoms()
        .into_iter()
        .filter_map(|a| match a {
            Formula::Atom(n, args) => Some((n.clone(), args.len())),
            _ => None,
        })
        .collect()
}

#[derive(Debug)]
enum TermIr {
    Var(usize),
    Const(usize),
    Func(usize, Vec<TermIr>),
}

#[derive(Debug)]
enum Ir {
    Atom(usize, Vec<TermIr>),
    Eq(TermIr, TermIr),
    Not(Box<Ir>),
    And(Box<Ir>, Box<Ir>),
    Or(Box<Ir>, Box<Ir>),
    Implies(Box<Ir>, Box<Ir>),
    Iff(Box<Ir>, Box<Ir>),
    Xor(Box<Ir>, Box<Ir>),
    ForAll(usize, Box<Ir>),
    Exists(usize, Box<Ir>),
}

/// Symbol tables shared by both compiled formulas.
#[derive(Default)]
struct Symbols {
    /// (id, arity) per predicate, in first-seen order.
    preds: Vec<usize>,
    pred_ids: BTreeMap<(u8, String, usize), usize>,
    consts: BTreeMap<String, usize>,
    funcs: BTreeMap<(String, usize), usize>,
    func_arity: Vec<usize>,
    max_slots: usize,
}

struct Compiler<'a> {
    syms: &'a mut Symbols,
    side: u8,
    alignment: &'a BTreeMap<(String, usize), String>,
    scope: Vec<String>,
}

impl Compiler<'_> {
    fn pred(&mut self, name: &str, arity: usize) -> usize {
        // aligned candidate predicates share the gold key; the rest keep a
        // side-qualified key so they never collide across formulas
        let key = match self.alignment.get(&(name.to_string(), arity)) {
            Some(g) if self.side == 1 => (0, g.clone(), arity),
            _ => (self.side, name.to_string(), arity),
        };
        let next = self.syms.preds.len();
        let syms = &mut *self.syms;
        *syms.pred_ids.entry(key).or_insert_with(|| {
            syms.preds.push(arity);
            next
        })
    }

    fn term(&mut self, t: &Term) -> TermIr {
        match t {
            Term::Var(n) => match self.scope.iter().rposition(|v| v == n) {
                Some(slot) => TermIr::Var(slot),
                // free variables behave as constants
                None => self.constant(&format!("?{n}")),
            },
            Term::Const(n) => self.constant(n),
            Term::Func(n, args) => {
                let next = self.syms.funcs.len();
                let syms = &mut *self.syms;
                let id = *syms.funcs.entry((n.clone(), args.len())).or_insert_with(|| {
                    syms.func_arity.push(args.len());
                    next
                });
                TermIr::Func(id, args.iter().map(|a| self.term(a)).collect())
            }
        }
    }

    fn constant(&mut self, name: &str) -> TermIr {
        let next = self.syms.consts.len();
        TermIr::Const(*self.syms.consts.entry(name.to_string()).or_insert(next))
    }

    fn formula(&mut self, f: &Formula) -> Ir {
        let bin = |c: &mut Self, l: &Formula, r: &Formula| (Box::new(c.formula(l)), Box::new(c.formula(r)));
        match f {
            Formula::Atom(n, args) => {
                let id = self.pred(n, args.len());
                Ir::Atom(id, args.iter().map(|a| self.term(a)).collect())
            }
            Formula::Equals(a, b) => Ir::Eq(self.term(a), self.term(b)),
            Formula::Not(g) => Ir::Not(Box::new(self.formula(g))),
            Formula::And(l, r) => {
                let (l, r) = bin(self, l, r);
                Ir::And(l, r)
            }
            Formula::Or(l, r) => {
                let (l, r) = bin(self, l, r);
                Ir::Or(l, r)
            }
            Formula::Implies(l, r) => {
                let (l, r) = bin(self, l, r);
                Ir::Implies(l, r)
            }
            Formula::Iff(l, r) => {
                let (l, r) = bin(self, l, r);
                Ir::Iff(l, r)
            }
            Formula::Xor(l, r) => {
                let (l, r) = bin(self, l, r);
                Ir::Xor(l, r)
            }
            Formula::ForAll(v, body) | Formula::Exists(v, body) => {
                let slot = self.scope.len();
                self.scope.push(v.clone());
                self.syms.max_slots = self.syms.max_slots.max(self.scope.len());
                let b = Box::new(self.formula(body));
                self.scope.pop();
                if matches!(f, Formula::ForAll(..)) {
                    Ir::ForAll(slot, b)
                } else {
                    Ir::Exists(slot, b)
                }
            }
        }
    }
}

/// A finite interpretation: truth per ground atom, an element per constant
/// and a table per function symbol.
struct Interp {
    d: usize,
    pred_base: Vec<usize>,
    truth: Vec<bool>,
    consts: Vec<usize>,
    funcs: Vec<Vec<usize>>,
}

impl Interp {
    fn term(&self, t: &TermIr, env: &[usize]) -> usize {
        match t {
            TermIr::Var(s) => env[*s],
            TermIr::Const(c) => self.consts[*c],
            TermIr::Func(id, args) => {
                let idx = args.iter().fold(0, |acc, a| acc * self.d + self.term(a, env));
                self.funcs[*id][idx]
            }
        }
    }

    fn eval(&self, f: &Ir, env: &mut [usize]) -> bool {
        match f {
            Ir::Atom(p, args) => {
                let idx = args.iter().fold(0, |acc, a| acc * self.d + self.term(a, env));
                self.truth[self.pred_base[*p] + idx]
            }
            Ir::Eq(a, b) => self.term(a, env) == self.term(b, env),
            Ir::Not(g) => !self.eval(g, env),
            Ir::And(l, r) => self.eval(l, env) && self.eval(r, env),
            Ir::Or(l, r) => self.eval(l, env) || self.eval(r, env),
            Ir::Implies(l, r) => !self.eval(l, env) || self.eval(r, env),
            Ir::Iff(l, r) => self.eval(l, env) == self.eval(r, env),
            Ir::Xor(l, r) => self.eval(l, env) != self.eval(r, env),
            Ir::ForAll(s, body) => (0..self.d).all(|e| {
                env[*s] = e;
                self.eval(body, env)
            }),
            Ir::Exists(s, body) => (0..self.d).any(|e| {
                env[*s] = e;
                self.eval(body, env)
            }),
        }
    }
}

/// How the interpretation space was covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeMode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeOutcome {
    pub score: f64,
    pub agreeing: u64,
    pub interpretations: u64,
    pub ground_atoms: usize,
    pub mode: LeMode,
}

/// Fraction of interpretations on which `gold` and `cand` agree.
pub fn le_score(gold: &Formula, cand: &Formula, cfg: &LeConfig) -> Result<f64, LeError> {
    le_outcome(gold, cand, cfg).map(|o| o.score)
}

pub fn le_outcome(gold: &Formula, cand: &Formula, cfg: &LeConfig) -> Result<LeOutcome, LeError> {
    cfg.validate()?;
    check_formula(gold)?;
    check_formula(cand)?;
    let d = cfg.domain_size;
    let alignment = align_predicates(gold, cand, cfg.predicate_align_threshold);

    let mut syms = Symbols::default();
    let compile = |syms: &mut Symbols, side: u8, f: &Formula| {
        Compiler {
            syms,
            side,
            alignment: &alignment,
            scope: Vec::new(),
        }
        .formula(f)
    };
    let g = compile(&mut syms, 0, gold);
    let c = compile(&mut syms, 1, cand);

    let overflow = LeError::GroundingOverflow { domain_size: d };
    let mut pred_base = Vec::with_capacity(syms.preds.len());
    let mut atoms = 0usize;
    for &arity in &syms.preds {
        pred_base.push(atoms);
        let n = d.checked_pow(arity as u32).ok_or(overflow.clone())?;
        atoms = atoms
            .checked_add(n)
            .filter(|&a| a <= MAX_GROUND_ATOMS)
            .ok_or(overflow.clone())?;
    }
    let mut func_sizes = Vec::with_capacity(syms.func_arity.len());
    for &arity in &syms.func_arity {
        let n = d
            .checked_pow(arity as u32)
            .filter(|&n| n <= MAX_GROUND_ATOMS)
            .ok_or(overflow.clone())?;
        func_sizes.push(n);
    }
    let n_consts = syms.consts.len();

    let mut interp = Interp {
        d,
        pred_base,
        truth: vec![false; atoms],
        consts: vec![0; n_consts],
        funcs: func_sizes.iter().map(|&n| vec![0; n]).collect(),
    };
    let mut env = vec![0usize; syms.max_slots];

    let const_space = (d as u64).checked_pow(n_consts as u32);
    let space = const_space.and_then(|cs| {
        1u64.checked_shl(atoms as u32)
            .filter(|_| atoms < 64)
            .map(|t| t.saturating_mul(cs))
    });
    let exhaustive = func_sizes.is_empty()
        && atoms <= cfg.exhaustive_atom_limit
        && space.is_some_and(|s| s <= MAX_EXHAUSTIVE_INTERPRETATIONS);

    let mut agreeing = 0u64;
    let total;
    if exhaustive {
        let cs = const_space.unwrap_or(1);
        total = space.unwrap_or(1);
        for ci in 0..cs {
            let mut rest = ci;
            for slot in interp.consts.iter_mut() {
                *slot = (rest % d as u64) as usize;
                rest /= d as u64;
            }
            for mask in 0..(1u64 << atoms) {
                for (i, t) in interp.truth.iter_mut().enumerate() {
                    *t = mask >> i & 1 == 1;
                }
                if interp.eval(&g, &mut env) == interp.eval(&c, &mut env) {
                    agreeing += 1;
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        total = cfg.sample_count as u64;
        for _ in 0..cfg.sample_count {
            for t in interp.truth.iter_mut() {
                *t = rng.gen();
            }
            for c in interp.consts.iter_mut() {
                *c = rng.gen_range(0..d);
            }
            for table in interp.funcs.iter_mut() {
                for v in table.iter_mut() {
                    *v = rng.gen_range(0..d);
                }
            }
            if interp.eval(&g, &mut env) == interp.eval(&c, &mut env) {
                agreeing += 1;
            }
        }
    }
    Ok(LeOutcome {
        score: agreeing as f64 / total as f64,
        agreeing,
        interpretations: total,
        ground_atoms: atoms,
        mode: if exhaustive {
            LeMode::Exhaustive
        } else {
            LeMode::Sampled
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_str(s).unwrap()
    }

    fn le(a: &str, b: &str) -> f64 {
        le_score(&p(a), &p(b), &LeConfig::default()).unwrap()
    }

    #[test]
    fn syntax_check_examples() {
        assert!(syntax_check("∀x (P(x) → Q(x))").valid);
        let bad = syntax_check("∀x (P(x");
        assert!(!bad.valid);
        assert!(matches!(
            bad.error,
            Some(SyntaxIssue::Parse(SyntaxError::Parse(
                crate::syntax::ParseError::UnbalancedParens { .. }
            )))
        ));
        let unused = syntax_check("∀x (P(y))");
        assert_eq!(
            unused.error,
            Some(SyntaxIssue::UnusedQuantifiedVariable { var: "x".into() })
        );
        // the inner binder shadows the outer one
        assert!(!syntax_check("∀x ∀x (P(x))").valid);
        assert!(syntax_check("∀x (P(f(x)))").valid);
        assert!(syntax_check("∃x (x = c)").valid);
    }

    #[test]
    fn identical_and_equivalent_pairs_score_one() {
        assert_eq!(le("∀x (P(x) → Q(x))", "∀x (P(x) → Q(x))"), 1.0);
        assert_eq!(le("P → Q", "¬P ∨ Q"), 1.0);
        assert_eq!(le("¬(P ∧ Q)", "¬P ∨ ¬Q"), 1.0);
        assert_eq!(le("∀x (P(x) → Q(x))", "∀x (¬Q(x) → ¬P(x))"), 1.0);
        assert_eq!(le("A ⊕ B", "¬(A ↔ B)"), 1.0);
        assert_eq!(le("¬¬P(c)", "P(c)"), 1.0);
    }

    #[test]
    fn propositional_disagreement_fraction() {
        // P ∧ Q vs P ∨ Q disagree exactly when one of them is true
        assert_eq!(le("P ∧ Q", "P ∨ Q"), 0.5);
        assert_eq!(le("P", "¬P"), 0.0);
    }

    #[test]
    fn quantifier_swap_at_domain_two() {
        // the body holds for an element in 3 of its 4 truth assignments
        let cfg = LeConfig {
            domain_size: 2,
            ..LeConfig::default()
        };
        let out = le_outcome(&p("∀x (P(x) → Q(x))"), &p("∃x (P(x) → Q(x))"), &cfg).unwrap();
        assert_eq!(out.mode, LeMode::Exhaustive);
        assert_eq!(out.interpretations, 16);
        // both true: 3 * 3, both false: 1 * 1
        assert_eq!(out.agreeing, 10);
    }

    #[test]
    fn predicate_alignment_by_edit_similarity() {
        let a = align_predicates(&p("∀x (Eel(x) → Fish(x))"), &p("∀x (IsEel(x) → Fish(x))"), 0.5);
        assert_eq!(a.get(&("IsEel".into(), 1)), Some(&"Eel".to_string()));
        assert_eq!(le("∀x (Eel(x) → Fish(x))", "∀x (IsEel(x) → Fish(x))"), 1.0);
        // arity differences never align
        let b = align_predicates(&p("P(a)"), &p("P(a, b)"), 0.0);
        assert!(b.is_empty());
    }

    #[test]
    fn unaligned_predicates_stay_distinct() {
        let s = le("Wolf(c)", "Tiger(c)");
        assert!(s > 0.0 && s < 1.0, "{s}");
    }

    #[test]
    fn sampling_is_deterministic_and_used_with_functions() {
        let a = p("∀x (P(f(x)) → P(x))");
        let b = p("∀x (P(x))");
        let cfg = LeConfig::default();
        let o1 = le_outcome(&a, &b, &cfg).unwrap();
        let o2 = le_outcome(&a, &b, &cfg).unwrap();
        assert_eq!(o1, o2);
        assert_eq!(o1.mode, LeMode::Sampled);
        assert_eq!(o1.interpretations, 2048);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(matches!(
            le_score(&p("∀x (P(y))"), &p("P(y)"), &LeConfig::default()),
            Err(LeError::SyntaxInvalid(_))
        ));
        let bad = LeConfig {
            domain_size: 0,
            ..LeConfig::default()
        };
        assert!(matches!(
            le_score(&p("P"), &p("P"), &bad),
            Err(LeError::InvalidConfig(_))
        ));
    }

    #[test]
    fn equality_is_element_identity() {
        assert_eq!(le("∀x (x = x)", "P ∨ ¬P"), 1.0);
        let cfg = LeConfig {
            domain_size: 1,
            ..LeConfig::default()
        };
        assert_eq!(le_score(&p("a = b"), &p("P ∨ ¬P"), &cfg).unwrap(), 1.0);
    }
}
