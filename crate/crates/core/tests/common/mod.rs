#![allow(dead_code)]

pub mod http;

use std::collections::{BTreeSet, HashMap, HashSet};

use foleval::metrics::logic::check_formula;
use foleval::metrics::smatch::{fol_to_triples, Target, TripleGraph};
use foleval::perturb::PerturbationKind;
use foleval::{Formula, Term};
use proptest::prelude::*;
use rand::Rng;

pub const FIXTURE: &str = include_str!("../../fixtures/fixture50.jsonl");

const VARS: [&str; 4] = ["x", "y", "z", "w"];
const CONSTS: [&str; 5] = ["alice", "bob", "C", "Rome", "caffeine"];
const FUNCS: [&str; 3] = ["father", "g", "SuccOf"];
const PREDS: [&str; 6] = ["P", "Q", "R", "Eel", "WantToBeAddictedTo", "IsIn"];

pub fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        prop::sample::select(&VARS[..]).prop_map(Term::var),
        prop::sample::select(&CONSTS[..]).prop_map(Term::constant),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        (prop::sample::select(&FUNCS[..]), prop::collection::vec(inner, 1..=2))
            .prop_map(|(n, args)| Term::Func(n.to_string(), args))
    })
}

/// Arbitrary formulas over the full alphabet. Variables are single
/// lowercase letters and constants never are, so printing is unambiguous.
pub fn arb_formula() -> impl Strategy<Value = Formula> {
    let atom = (
        prop::sample::select(&PREDS[..]),
        prop::collection::vec(arb_term(), 0..=3),
    )
        .prop_map(|(p, args)| Formula::atom(p, args));
    let eq = (arb_term(), arb_term()).prop_map(|(a, b)| Formula::Equals(a, b));
    let leaf = prop_oneof![4 => atom, 1 => eq];
    leaf.prop_recursive(6, 40, 2, |inner| {
        let var = || prop::sample::select(&VARS[..]);
        prop_oneof![
            (var(), inner.clone()).prop_map(|(v, b)| Formula::forall(v, b)),
            (var(), inner.clone()).prop_map(|(v, b)| Formula::exists(v, b)),
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::implies(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::iff(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::xor(l, r)),
        ]
    })
}

/// Vocabulary for closed random formulas.
pub struct Vocab {
    pub preds: &'static [(&'static str, usize)],
    pub consts: &'static [&'static str],
    pub funcs: &'static [&'static str],
    pub equality: bool,
}

/// Nine ground atoms at domain size 2.
pub const LE_VOCAB: Vocab = Vocab {
    preds: &[("P", 0), ("Q", 1), ("S", 1), ("R", 2)],
    consts: &["alice", "bob"],
    funcs: &[],
    equality: true,
};

pub const SMATCH_VOCAB: Vocab = Vocab {
    preds: &[("P", 0), ("Q", 1), ("S", 1), ("R", 2)],
    consts: &["alice", "bob"],
    funcs: &["father"],
    equality: true,
};

fn gen_term<R: Rng>(rng: &mut R, v: &Vocab, scope: &[&'static str]) -> Term {
    if !v.funcs.is_empty() && rng.gen_bool(0.1) {
        let f = v.funcs[rng.gen_range(0..v.funcs.len())];
        return Term::Func(f.into(), vec![gen_term(rng, v, scope)]);
    }
    if !scope.is_empty() && rng.gen_bool(0.7) {
        Term::var(scope[rng.gen_range(0..scope.len())])
    } else {
        Term::constant(v.consts[rng.gen_range(0..v.consts.len())])
    }
}

fn gen_node<R: Rng>(rng: &mut R, v: &Vocab, depth: usize, scope: &mut Vec<&'static str>) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        if v.equality && rng.gen_bool(0.1) {
            return Formula::Equals(gen_term(rng, v, scope), gen_term(rng, v, scope));
        }
        let (p, arity) = v.preds[rng.gen_range(0..v.preds.len())];
        let args = (0..arity).map(|_| gen_term(rng, v, scope)).collect();
        return Formula::atom(p, args);
    }
    let d = depth - 1;
    match rng.gen_range(0..9) {
        0 | 1 => {
            let var = VARS[rng.gen_range(0..3)];
            scope.push(var);
            let body = gen_node(rng, v, d, scope);
            scope.pop();
            if rng.gen_bool(0.5) {
                Formula::forall(var, body)
            } else {
                Formula::exists(var, body)
            }
        }
        2 => Formula::not(gen_node(rng, v, d, scope)),
        k => {
            let l = gen_node(rng, v, d, scope);
            let r = gen_node(rng, v, d, scope);
            match k {
                3 | 4 => Formula::and(l, r),
                5 => Formula::or(l, r),
                6 => Formula::implies(l, r),
                7 => Formula::iff(l, r),
                _ => Formula::xor(l, r),
            }
        }
    }
}

/// A random closed formula that passes the LE syntax check.
pub fn gen_closed<R: Rng>(rng: &mut R, v: &Vocab, max_depth: usize) -> Formula {
    loop {
        let f = gen_node(rng, v, max_depth, &mut Vec::new());
        if check_formula(&f).is_ok() {
            return f;
        }
    }
}

fn predicate_symbols(f: &Formula, out: &mut BTreeSet<(String, usize)>) {
    match f {
        Formula::Atom(n, args) => {
            out.insert((n.clone(), args.len()));
        }
        Formula::Equals(..) => {}
        Formula::ForAll(_, b) | Formula::Exists(_, b) | Formula::Not(b) => predicate_symbols(b, out),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) | Formula::Xor(l, r) => {
            predicate_symbols(l, out);
            predicate_symbols(r, out);
        }
    }
}

fn constants(f: &Formula, out: &mut BTreeSet<String>) {
    fn term(t: &Term, out: &mut BTreeSet<String>) {
        match t {
            Term::Const(c) => {
                out.insert(c.clone());
            }
            Term::Var(_) => {}
            Term::Func(..) => panic!("the propositional expansion does not handle functions"),
        }
    }
    match f {
        Formula::Atom(_, args) => args.iter().for_each(|a| term(a, out)),
        Formula::Equals(a, b) => {
            term(a, out);
            term(b, out);
        }
        Formula::ForAll(_, b) | Formula::Exists(_, b) | Formula::Not(b) => constants(b, out),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) | Formula::Xor(l, r) => {
            constants(l, out);
            constants(r, out);
        }
    }
}

/// Gold and candidate drawn from the nine-atom vocabulary; the candidate is
/// either independent or an operator perturbation of the gold.
pub fn le_pair<R: Rng>(rng: &mut R) -> (Formula, Formula) {
    let gold = gen_closed(rng, &LE_VOCAB, 4);
    let cand = match rng.gen_range(0..4) {
        0 => gen_closed(rng, &LE_VOCAB, 4),
        k => {
            let kind = [
                PerturbationKind::OpQuantifier,
                PerturbationKind::OpNegation,
                PerturbationKind::OpAndOr,
            ][k - 1];
            kind.apply(&gold).result.unwrap_or_else(|| gold.clone())
        }
    };
    (gold, cand)
}

/// Small gold/candidate pairs with at most 8 mappable nodes on each side.
pub fn smatch_pair<R: Rng>(rng: &mut R) -> (Formula, Formula) {
    loop {
        let gold = gen_closed(rng, &SMATCH_VOCAB, 3);
        let cand = match rng.gen_range(0..5) {
            0 => gen_closed(rng, &SMATCH_VOCAB, 3),
            k => {
                let kind = [
                    PerturbationKind::OpQuantifier,
                    PerturbationKind::OpNegation,
                    PerturbationKind::OpAndOr,
                    PerturbationKind::TextMinusVariable,
                ][k - 1];
                kind.apply(&gold).result.unwrap_or_else(|| gold.clone())
            }
        };
        let small = |f: &Formula| fol_to_triples(f).mappable() <= 8;
        if small(&gold) && small(&cand) {
            return (gold, cand);
        }
    }
}

/// Ground atoms `(predicate, args)` over domain `0..d` for the predicate
/// symbols of both formulas, in a fixed order.
pub fn ground_atoms(a: &Formula, b: &Formula, d: usize) -> Vec<(String, Vec<usize>)> {
    let mut preds = BTreeSet::new();
    predicate_symbols(a, &mut preds);
    predicate_symbols(b, &mut preds);
    let mut out = Vec::new();
    for (name, arity) in preds {
        let count = d.pow(arity as u32);
        for mut idx in 0..count {
            let mut args = vec![0; arity];
            for slot in args.iter_mut().rev() {
                *slot = idx % d;
                idx /= d;
            }
            out.push((name.clone(), args));
        }
    }
    out
}

struct World<'a> {
    d: usize,
    truth: &'a HashMap<(String, Vec<usize>), bool>,
    consts: &'a HashMap<String, usize>,
}

impl World<'_> {
    fn term(&self, t: &Term, env: &HashMap<String, usize>) -> usize {
        match t {
            Term::Var(v) => env[v],
            Term::Const(c) => self.consts[c],
            Term::Func(..) => unreachable!(),
        }
    }

    fn holds(&self, f: &Formula, env: &mut HashMap<String, usize>) -> bool {
        match f {
            Formula::Atom(n, args) => {
                let key = (n.clone(), args.iter().map(|a| self.term(a, env)).collect());
                self.truth[&key]
            }
            Formula::Equals(a, b) => self.term(a, env) == self.term(b, env),
            Formula::Not(b) => !self.holds(b, env),
            Formula::And(l, r) => self.holds(l, env) & self.holds(r, env),
            Formula::Or(l, r) => self.holds(l, env) | self.holds(r, env),
            Formula::Implies(l, r) => !self.holds(l, env) | self.holds(r, env),
            Formula::Iff(l, r) => self.holds(l, env) == self.holds(r, env),
            Formula::Xor(l, r) => self.holds(l, env) ^ self.holds(r, env),
            Formula::ForAll(v, b) | Formula::Exists(v, b) => {
                let saved = env.get(v).copied();
                let mut results = Vec::with_capacity(self.d);
                for e in 0..self.d {
                    env.insert(v.clone(), e);
                    results.push(self.holds(b, env));
                }
                match saved {
                    Some(s) => env.insert(v.clone(), s),
                    None => env.remove(v),
                };
                if matches!(f, Formula::ForAll(..)) {
                    results.iter().all(|&x| x)
                } else {
                    results.iter().any(|&x| x)
                }
            }
        }
    }
}

/// Exact count of interpretations over domain `0..d` on which the two closed,
/// function-free formulas agree, and the total number of interpretations.
/// Predicates are identified by name, constants range over the domain.
pub fn agreement_oracle(a: &Formula, b: &Formula, d: usize) -> (u64, u64) {
    let atoms = ground_atoms(a, b, d);
    let mut names = BTreeSet::new();
    constants(a, &mut names);
    constants(b, &mut names);
    let names: Vec<String> = names.into_iter().collect();
    let const_assignments = (d as u64).pow(names.len() as u32);
    let mut agree = 0;
    let mut total = 0;
    for ci in 0..const_assignments {
        let mut rest = ci;
        let mut consts = HashMap::new();
        for n in &names {
            consts.insert(n.clone(), (rest % d as u64) as usize);
            rest /= d as u64;
        }
        for mask in 0..(1u64 << atoms.len()) {
            let truth: HashMap<(String, Vec<usize>), bool> = atoms
                .iter()
                .enumerate()
                .map(|(i, k)| (k.clone(), (mask >> i) & 1 == 1))
                .collect();
            let w = World {
                d,
                truth: &truth,
                consts: &consts,
            };
            total += 1;
            if w.holds(a, &mut HashMap::new()) == w.holds(b, &mut HashMap::new()) {
                agree += 1;
            }
        }
    }
    (agree, total)
}

/// Maximum matched-triple count over every kind-preserving partial injection
/// of the nodes of `a` into the nodes of `b`, by plain enumeration.
pub fn brute_force_matched(a: &TripleGraph, b: &TripleGraph) -> usize {
    let bset: HashSet<(usize, String, Target)> = b
        .triples
        .iter()
        .map(|t| (t.source, t.label.clone(), t.target.clone()))
        .collect();
    let count = |map: &[Option<usize>]| {
        a.triples
            .iter()
            .filter(|t| {
                let Some(s) = map[t.source] else { return false };
                let target = match &t.target {
                    Target::Node(n) => match map[*n] {
                        Some(m) => Target::Node(m),
                        None => return false,
                    },
                    lit => lit.clone(),
                };
                bset.contains(&(s, t.label.clone(), target))
            })
            .count()
    };
    fn rec(
        i: usize,
        a: &TripleGraph,
        b: &TripleGraph,
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        count: &dyn Fn(&[Option<usize>]) -> usize,
    ) -> usize {
        if i == a.nodes.len() {
            return count(map);
        }
        let mut best = rec(i + 1, a, b, map, used, count);
        for j in 0..b.nodes.len() {
            if !used[j] && b.nodes[j] == a.nodes[i] {
                used[j] = true;
                map[i] = Some(j);
                best = best.max(rec(i + 1, a, b, map, used, count));
                map[i] = None;
                used[j] = false;
            }
        }
        best
    }
    rec(
        0,
        a,
        b,
        &mut vec![None; a.nodes.len()],
        &mut vec![false; b.nodes.len()],
        &count,
    )
}

/// `2PR/(P+R)` with `P = m/|b|`, `R = m/|a|`.
pub fn f1_from_counts(matched: usize, a_len: usize, b_len: usize) -> f64 {
    if matched == 0 {
        return 0.0;
    }
    let p = matched as f64 / b_len as f64;
    let r = matched as f64 / a_len as f64;
    2.0 * p * r / (p + r)
}

/// Mean absolute difference, written out longhand.
pub fn disagreement_reference(a: &[f64], b: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..a.len() {
        let diff = if a[i] > b[i] { a[i] - b[i] } else { b[i] - a[i] };
        total += diff;
    }
    total / a.len() as f64
}
