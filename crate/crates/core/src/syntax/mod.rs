//! First-order logic syntax: tokens, AST, parser and printer.
//!
//! The alphabet is fixed to nine operators: `∀ ∃ ¬ ∧ ∨ → ↔ ⊕ =`. Input may
//! use the unicode glyphs, the ASCII aliases (`forall exists ~ & | -> <-> xor`)
//! or a mix of both; output notation is chosen by the caller.

mod lexer;
mod parser;
mod printer;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexer::{tokenize, LexError, Span, Token, TokenKind, TokenSeq};
pub use parser::{parse, ParseError};
pub use printer::{print, print_with, Parens};

/// Surface notation accepted by the lexer or produced by the printer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Notation {
    Unicode,
    Ascii,
    #[default]
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
    Func(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) | Term::Func(n, _) => n,
        }
    }
}

/// A formula over the nine-operator alphabet.
///
/// `Equals` relates two terms; every other binary node relates formulas.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    ForAll(String, Box<Formula>),
    Exists(String, Box<Formula>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Xor(Box<Formula>, Box<Formula>),
    Equals(Term, Term),
    Atom(String, Vec<Term>),
}

impl Formula {
    pub fn atom(name: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom(name.into(), args)
    }

    pub fn prop(name: impl Into<String>) -> Self {
        Formula::Atom(name.into(), Vec::new())
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::ForAll(var.into(), Box::new(body))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(body: Formula) -> Self {
        Formula::Not(Box::new(body))
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Self {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Self {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn iff(lhs: Formula, rhs: Formula) -> Self {
        Formula::Iff(Box::new(lhs), Box::new(rhs))
    }

    pub fn xor(lhs: Formula, rhs: Formula) -> Self {
        Formula::Xor(Box::new(lhs), Box::new(rhs))
    }

    /// The operator at the root of this node, `None` for atoms.
    pub fn operator(&self) -> Option<OperatorKind> {
        Some(match self {
            Formula::ForAll(..) => OperatorKind::ForAll,
            Formula::Exists(..) => OperatorKind::Exists,
            Formula::Not(_) => OperatorKind::Not,
            Formula::And(..) => OperatorKind::And,
            Formula::Or(..) => OperatorKind::Or,
            Formula::Implies(..) => OperatorKind::Implies,
            Formula::Iff(..) => OperatorKind::Iff,
            Formula::Xor(..) => OperatorKind::Xor,
            Formula::Equals(..) => OperatorKind::Equals,
            Formula::Atom(..) => return None,
        })
    }

    /// Immediate subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::ForAll(_, b) | Formula::Exists(_, b) | Formula::Not(b) => vec![b],
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Iff(l, r)
            | Formula::Xor(l, r) => vec![l, r],
            Formula::Equals(..) | Formula::Atom(..) => Vec::new(),
        }
    }

    /// Nesting depth; atoms and equalities have depth 0.
    pub fn depth(&self) -> usize {
        self.children().into_iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    /// Atoms in left-to-right order.
    pub fn atoms(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if matches!(f, Formula::Atom(..)) {
                out.push(f);
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self, Notation::Unicode))
    }
}

/// Either stage of turning source text into a [`Formula`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl SyntaxError {
    pub fn span(&self) -> Span {
        match self {
            SyntaxError::Lex(e) => e.span,
            SyntaxError::Parse(e) => e.span(),
        }
    }
}

/// Tokenize (mixed notation) and parse in one step.
pub fn parse_str(source: &str) -> Result<Formula, SyntaxError> {
    let tokens = tokenize(source, Notation::Mixed)?;
    Ok(parse(&tokens)?)
}

impl FromStr for Formula {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorKind {
    ForAll,
    Exists,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Xor,
    Equals,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 9] = [
        OperatorKind::ForAll,
        OperatorKind::Exists,
        OperatorKind::Not,
        OperatorKind::And,
        OperatorKind::Or,
        OperatorKind::Implies,
        OperatorKind::Iff,
        OperatorKind::Xor,
        OperatorKind::Equals,
    ];

    pub fn glyph(self) -> &'static str {
        match self {
            OperatorKind::ForAll => "∀",
            OperatorKind::Exists => "∃",
            OperatorKind::Not => "¬",
            OperatorKind::And => "∧",
            OperatorKind::Or => "∨",
            OperatorKind::Implies => "→",
            OperatorKind::Iff => "↔",
            OperatorKind::Xor => "⊕",
            OperatorKind::Equals => "=",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::ForAll => "forall",
            OperatorKind::Exists => "exists",
            OperatorKind::Not => "not",
            OperatorKind::And => "and",
            OperatorKind::Or => "or",
            OperatorKind::Implies => "implies",
            OperatorKind::Iff => "iff",
            OperatorKind::Xor => "xor",
            OperatorKind::Equals => "equals",
        }
    }
}

/// Per-operator occurrence counts of a formula.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorProfile {
    pub counts: BTreeMap<OperatorKind, usize>,
    pub total: usize,
}

impl OperatorProfile {
    pub fn count(&self, op: OperatorKind) -> usize {
        self.counts.get(&op).copied().unwrap_or(0)
    }
}

/// Count every operator node; atoms contribute nothing.
pub fn profile(f: &Formula) -> OperatorProfile {
    let mut p = OperatorProfile::default();
    f.visit(&mut |node| {
        if let Some(op) = node.operator() {
            *p.counts.entry(op).or_default() += 1;
            p.total += 1;
        }
    });
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_counts_quantifier_and_implication() {
        let f: Formula = "∀x (W(x, C) → A(x, C))".parse().unwrap();
        let p = profile(&f);
        assert_eq!(p.count(OperatorKind::ForAll), 1);
        assert_eq!(p.count(OperatorKind::Implies), 1);
        assert_eq!(p.counts.len(), 2);
        assert_eq!(p.total, 2);
    }

    #[test]
    fn profile_of_bare_atom_is_empty() {
        let p = profile(&Formula::prop("P"));
        assert!(p.counts.is_empty());
        assert_eq!(p.total, 0);
    }

    #[test]
    fn profile_counts_equality_and_xor() {
        let f: Formula = "¬(a = b) ⊕ (P ∨ Q ∧ R)".parse().unwrap();
        let p = profile(&f);
        assert_eq!(p.count(OperatorKind::Equals), 1);
        assert_eq!(p.count(OperatorKind::Xor), 1);
        assert_eq!(p.count(OperatorKind::Not), 1);
        assert_eq!(p.total, 5);
        assert_eq!(p.total, p.counts.values().sum::<usize>());
    }

    #[test]
    fn depth_and_atoms() {
        let f: Formula = "∀x (¬W(x, C) → A(x, C))".parse().unwrap();
        assert_eq!(f.depth(), 3);
        let names: Vec<_> = f
            .atoms()
            .into_iter()
            .map(|a| match a {
                Formula::Atom(n, _) => n.as_str(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(names, ["W", "A"]);
    }
}
