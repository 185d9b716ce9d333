//! Controlled edits of ground-truth formulas for probing metric sensitivity.
//!
//! Three operator perturbations (quantifier swap, atom negation toggle,
//! conjunction/disjunction swap) and two text perturbations (strip all
//! operators, replace all names with generic letters). Every function is
//! deterministic and reports how many nodes it touched.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{profile, Formula, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PerturbationKind {
    #[serde(rename = "op-quantifier")]
    OpQuantifier,
    #[serde(rename = "op-negation")]
    OpNegation,
    #[serde(rename = "op-andor")]
    OpAndOr,
    #[serde(rename = "t-operator")]
    TextMinusOperator,
    #[serde(rename = "t-variable")]
    TextMinusVariable,
}

impl PerturbationKind {
    pub const ALL: [PerturbationKind; 5] = [
        PerturbationKind::OpQuantifier,
        PerturbationKind::OpNegation,
        PerturbationKind::OpAndOr,
        PerturbationKind::TextMinusOperator,
        PerturbationKind::TextMinusVariable,
    ];

    /// Stable identifier used on the command line and in file names.
    pub fn id(self) -> &'static str {
        match self {
            PerturbationKind::OpQuantifier => "op-quantifier",
            PerturbationKind::OpNegation => "op-negation",
            PerturbationKind::OpAndOr => "op-andor",
            PerturbationKind::TextMinusOperator => "t-operator",
            PerturbationKind::TextMinusVariable => "t-variable",
        }
    }

    pub fn apply(self, f: &Formula) -> PerturbationOutcome {
        match self {
            PerturbationKind::OpQuantifier => perturb_quantifier(f),
            PerturbationKind::OpNegation => perturb_negation(f),
            PerturbationKind::OpAndOr => perturb_andor(f),
            PerturbationKind::TextMinusOperator => perturb_text_minus_operator(f),
            PerturbationKind::TextMinusVariable => perturb_text_minus_variable(f),
        }
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown perturbation kind {0:?}")]
pub struct UnknownKind(pub String);

impl FromStr for PerturbationKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PerturbationKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbationOutcome {
    pub kind: PerturbationKind,
    /// `Some` exactly when the perturbation applied.
    pub result: Option<Formula>,
    pub sites: usize,
}

impl PerturbationOutcome {
    pub fn applied(&self) -> bool {
        self.result.is_some()
    }

    fn new(kind: PerturbationKind, result: Formula, sites: usize) -> Self {
        PerturbationOutcome {
            kind,
            result: (sites > 0).then_some(result),
            sites,
        }
    }
}

fn map_children(f: &Formula, mut g: impl FnMut(&Formula) -> Formula) -> Formula {
    match f {
        Formula::ForAll(v, b) => Formula::forall(v.clone(), g(b)),
        Formula::Exists(v, b) => Formula::exists(v.clone(), g(b)),
        Formula::Not(b) => Formula::not(g(b)),
        Formula::And(l, r) => Formula::and(g(l), g(r)),
        Formula::Or(l, r) => Formula::or(g(l), g(r)),
        Formula::Implies(l, r) => Formula::implies(g(l), g(r)),
        Formula::Iff(l, r) => Formula::iff(g(l), g(r)),
        Formula::Xor(l, r) => Formula::xor(g(l), g(r)),
        Formula::Equals(..) | Formula::Atom(..) => f.clone(),
    }
}

/// Swap every `∀` with `∃` and vice versa.
pub fn perturb_quantifier(f: &Formula) -> PerturbationOutcome {
    fn go(f: &Formula, sites: &mut usize) -> Formula {
        match f {
            Formula::ForAll(v, b) => {
                *sites += 1;
                Formula::exists(v.clone(), go(b, sites))
            }
            Formula::Exists(v, b) => {
                *sites += 1;
                Formula::forall(v.clone(), go(b, sites))
            }
            _ => map_children(f, |c| go(c, sites)),
        }
    }
    let mut sites = 0;
    let out = go(f, &mut sites);
    PerturbationOutcome::new(PerturbationKind::OpQuantifier, out, sites)
}

/// Toggle negation on every atom: `¬P` becomes `P`, `P` becomes `¬P`.
///
/// Only a `¬` whose operand is an atom counts; negated compound
/// subformulas are left alone.
pub fn perturb_negation(f: &Formula) -> PerturbationOutcome {
    fn go(f: &Formula, sites: &mut usize) -> Formula {
        match f {
            Formula::Not(inner) if matches!(**inner, Formula::Atom(..)) => {
                *sites += 1;
                (**inner).clone()
            }
            Formula::Atom(..) => {
                *sites += 1;
                Formula::not(f.clone())
            }
            _ => map_children(f, |c| go(c, sites)),
        }
    }
    let mut sites = 0;
    let out = go(f, &mut sites);
    PerturbationOutcome::new(PerturbationKind::OpNegation, out, sites)
}

/// Swap every `∧` with `∨` and vice versa.
pub fn perturb_andor(f: &Formula) -> PerturbationOutcome {
    fn go(f: &Formula, sites: &mut usize) -> Formula {
        match f {
            Formula::And(l, r) => {
                *sites += 1;
                Formula::or(go(l, sites), go(r, sites))
            }
            Formula::Or(l, r) => {
                *sites += 1;
                Formula::and(go(l, sites), go(r, sites))
            }
            _ => map_children(f, |c| go(c, sites)),
        }
    }
    let mut sites = 0;
    let out = go(f, &mut sites);
    PerturbationOutcome::new(PerturbationKind::OpAndOr, out, sites)
}

/// Drop every operator and join the remaining atoms with `∨`.
///
/// Atoms keep their argument lists; equalities are kept as standalone
/// facts. Applies whenever the formula has at least one operator.
pub fn perturb_text_minus_operator(f: &Formula) -> PerturbationOutcome {
    let removed = profile(f).total;
    if removed == 0 {
        return PerturbationOutcome {
            kind: PerturbationKind::TextMinusOperator,
            result: None,
            sites: 0,
        };
    }
    let mut facts: Vec<Formula> = Vec::new();
    f.visit(&mut |node| {
        if matches!(node, Formula::Atom(..) | Formula::Equals(..)) {
            facts.push(node.clone());
        }
    });
    let out = facts
        .into_iter()
        .reduce(Formula::or)
        .expect("every formula has at least one atom or equality");
    PerturbationOutcome::new(PerturbationKind::TextMinusOperator, out, removed)
}

/// Fresh name for the `index`-th renamed symbol: `A`..`Z`, then `A1`, `A2`, ...
fn fresh_name(index: usize) -> String {
    if index < 26 {
        char::from(b'A' + index as u8).to_string()
    } else {
        format!("A{}", index - 25)
    }
}

/// Replace predicate names, then constant and function names, by generic
/// capital letters in first-occurrence order. Quantified and free variables
/// keep their names; equal source names get equal replacements.
pub fn perturb_text_minus_variable(f: &Formula) -> PerturbationOutcome {
    let mut predicates: Vec<&str> = Vec::new();
    let mut others: Vec<&str> = Vec::new();
    let mut variables: HashSet<&str> = HashSet::new();

    fn collect_term<'a>(t: &'a Term, others: &mut Vec<&'a str>, vars: &mut HashSet<&'a str>) {
        match t {
            Term::Var(n) => {
                vars.insert(n);
            }
            Term::Const(n) => others.push(n),
            Term::Func(n, args) => {
                others.push(n);
                for a in args {
                    collect_term(a, others, vars);
                }
            }
        }
    }

    f.visit(&mut |node| match node {
        Formula::Atom(name, args) => {
            predicates.push(name);
            for a in args {
                collect_term(a, &mut others, &mut variables);
            }
        }
        Formula::Equals(a, b) => {
            collect_term(a, &mut others, &mut variables);
            collect_term(b, &mut others, &mut variables);
        }
        Formula::ForAll(v, _) | Formula::Exists(v, _) => {
            variables.insert(v);
        }
        _ => {}
    });

    let mut renames: HashMap<&str, String> = HashMap::new();
    let mut pred_renames: HashMap<&str, String> = HashMap::new();
    let mut next = 0usize;
    let mut fresh = || loop {
        let candidate = fresh_name(next);
        next += 1;
        if !variables.contains(candidate.as_str()) {
            return candidate;
        }
    };
    for p in predicates {
        if !pred_renames.contains_key(p) {
            pred_renames.insert(p, fresh());
        }
    }
    for o in others {
        if !renames.contains_key(o) {
            renames.insert(o, fresh());
        }
    }
    let sites = pred_renames.len() + renames.len();

    fn rename_term(t: &Term, renames: &HashMap<&str, String>) -> Term {
        match t {
            Term::Var(_) => t.clone(),
            Term::Const(n) => Term::Const(renames[n.as_str()].clone()),
            Term::Func(n, args) => Term::Func(
                renames[n.as_str()].clone(),
                args.iter().map(|a| rename_term(a, renames)).collect(),
            ),
        }
    }
    fn go(f: &Formula, preds: &HashMap<&str, String>, renames: &HashMap<&str, String>) -> Formula {
        match f {
            Formula::Atom(n, args) => Formula::Atom(
                preds[n.as_str()].clone(),
                args.iter().map(|a| rename_term(a, renames)).collect(),
            ),
            Formula::Equals(a, b) => Formula::Equals(rename_term(a, renames), rename_term(b, renames)),
            _ => map_children(f, |c| go(c, preds, renames)),
        }
    }
    let out = go(f, &pred_renames, &renames);
    PerturbationOutcome::new(PerturbationKind::TextMinusVariable, out, sites)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PerturbError {
    #[error("corpus is empty")]
    EmptyCorpus,
}

/// Share of records each perturbation applies to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Applicability {
    pub kind: PerturbationKind,
    pub applied: usize,
    pub total: usize,
    pub percent: f64,
}

impl Applicability {
    /// Percentage rounded to two decimals, as printed in reports.
    pub fn percent_2dp(&self) -> String {
        format!("{:.2}", self.percent)
    }
}

pub fn applicability_report(corpus: &[Formula]) -> Result<BTreeMap<PerturbationKind, Applicability>, PerturbError> {
    if corpus.is_empty() {
        return Err(PerturbError::EmptyCorpus);
    }
    Ok(PerturbationKind::ALL
        .into_iter()
        .map(|kind| {
            let applied = corpus.iter().filter(|f| kind.apply(f).applied()).count();
            let percent = 100.0 * applied as f64 / corpus.len() as f64;
            (
                kind,
                Applicability {
                    kind,
                    applied,
                    total: corpus.len(),
                    percent,
                },
            )
        })
        .collect())
}
