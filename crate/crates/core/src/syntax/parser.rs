//! Recursive descent parser.
//!
//! Precedence, tightest first: `¬` and quantifiers, `∧`, `∨ ⊕`, `→ ↔`.
//! `∧ ∨ ⊕` associate to the left, `→ ↔` to the right. A quantifier binds one
//! variable and scopes over the unary formula that follows it, so
//! `∀x (P(x) → Q(x))` needs its parentheses. `=` only relates terms.

use thiserror::Error;

use super::lexer::{is_single_lowercase, Span, Token, TokenKind};
use super::{Formula, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected {found:?} at {span}, expected one of {expected:?}")]
    Unexpected {
        span: Span,
        found: String,
        expected: Vec<&'static str>,
    },
    #[error("unexpected end of input at {span}, expected one of {expected:?}")]
    UnexpectedEnd { span: Span, expected: Vec<&'static str> },
    #[error("unbalanced parenthesis at {span}")]
    UnbalancedParens { span: Span },
    #[error("quantifier at {span} has no body")]
    DanglingQuantifier { span: Span },
    #[error("empty formula")]
    Empty,
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::Unexpected { span, .. }
            | ParseError::UnexpectedEnd { span, .. }
            | ParseError::UnbalancedParens { span }
            | ParseError::DanglingQuantifier { span } => *span,
            ParseError::Empty => Span::default(),
        }
    }
}

type PResult<T> = Result<T, ParseError>;

const FORMULA_START: &[&str] = &["(", "¬", "∀", "∃", "name"];

/// Parse a token stream into a single formula.
pub fn parse(tokens: &[Token]) -> PResult<Formula> {
    if tokens.is_empty() {
        return Err(ParseError::Empty);
    }
    check_balance(tokens)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        scope: Vec::new(),
    };
    let f = p.formula()?;
    if let Some(t) = p.peek() {
        return Err(ParseError::Unexpected {
            span: t.span,
            found: t.text.clone(),
            expected: vec!["∧", "∨", "⊕", "→", "↔", "end of input"],
        });
    }
    Ok(f)
}

fn check_balance(tokens: &[Token]) -> PResult<()> {
    let mut open: Vec<Span> = Vec::new();
    for t in tokens {
        match t.kind {
            TokenKind::LParen => open.push(t.span),
            TokenKind::RParen if open.pop().is_none() => {
                return Err(ParseError::UnbalancedParens { span: t.span });
            }
            _ => {}
        }
    }
    match open.pop() {
        Some(span) => Err(ParseError::UnbalancedParens { span }),
        None => Ok(()),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Binary {
    And,
    Or,
    Xor,
    Implies,
    Iff,
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    /// Variables bound by enclosing quantifiers, innermost last.
    scope: Vec<String>,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&'t Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn end_span(&self) -> Span {
        let end = self.tokens.last().map(|t| t.span.end).unwrap_or(0);
        Span::new(end, end)
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::Unexpected {
                span: t.span,
                found: t.text.clone(),
                expected: expected.to_vec(),
            },
            None => ParseError::UnexpectedEnd {
                span: self.end_span(),
                expected: expected.to_vec(),
            },
        }
    }

    fn peek_binary(&self) -> Option<Binary> {
        let t = self.peek()?;
        match (t.kind, t.canonical()) {
            (TokenKind::Connective, "∧") => Some(Binary::And),
            (TokenKind::Connective, "∨") => Some(Binary::Or),
            (TokenKind::Connective, "→") => Some(Binary::Implies),
            (TokenKind::Connective, "↔") => Some(Binary::Iff),
            (TokenKind::Xor, _) => Some(Binary::Xor),
            _ => None,
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        match self.peek_binary() {
            Some(op @ (Binary::Implies | Binary::Iff)) => {
                self.bump();
                let rhs = self.formula()?;
                Ok(match op {
                    Binary::Implies => Formula::implies(lhs, rhs),
                    _ => Formula::iff(lhs, rhs),
                })
            }
            _ => Ok(lhs),
        }
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.conjunction()?;
        while let Some(op @ (Binary::Or | Binary::Xor)) = self.peek_binary() {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = match op {
                Binary::Or => Formula::or(lhs, rhs),
                _ => Formula::xor(lhs, rhs),
            };
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.unary()?;
        while self.peek_binary() == Some(Binary::And) {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        let Some(t) = self.peek() else {
            return Err(self.unexpected(FORMULA_START));
        };
        match t.kind {
            TokenKind::Negation => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            TokenKind::Quantifier => {
                self.bump();
                let var = match self.peek() {
                    Some(v) if v.is_name() => {
                        self.bump();
                        v.text.clone()
                    }
                    _ => return Err(self.unexpected(&["variable"])),
                };
                let body_starts = self.peek().is_some_and(|n| {
                    matches!(
                        n.kind,
                        TokenKind::LParen
                            | TokenKind::Negation
                            | TokenKind::Quantifier
                            | TokenKind::Identifier
                            | TokenKind::Variable
                            | TokenKind::Constant
                    )
                });
                if !body_starts {
                    return Err(ParseError::DanglingQuantifier {
                        span: Span::new(t.span.start, self.tokens[self.pos - 1].span.end),
                    });
                }
                self.scope.push(var.clone());
                let body = self.unary();
                self.scope.pop();
                let body = body?;
                Ok(if t.canonical() == "∀" {
                    Formula::forall(var, body)
                } else {
                    Formula::exists(var, body)
                })
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.formula()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            _ if t.is_name() => self.atom_or_equality(),
            _ => Err(self.unexpected(FORMULA_START)),
        }
    }

    fn expect_rparen(&mut self) -> PResult<()> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::RParen => {
                self.bump();
                Ok(())
            }
            _ => Err(self.unexpected(&[")"])),
        }
    }

    fn atom_or_equality(&mut self) -> PResult<Formula> {
        let name_tok = self.bump().expect("caller checked a name is next");
        let args = self.opt_args()?;
        if self.peek().is_some_and(|t| t.kind == TokenKind::Equality) {
            self.bump();
            let lhs = self.make_term(&name_tok.text, args);
            let rhs = self.term()?;
            return Ok(Formula::Equals(lhs, rhs));
        }
        Ok(Formula::Atom(name_tok.text.clone(), args.unwrap_or_default()))
    }

    /// `( term, ... )` following a name, if present.
    fn opt_args(&mut self) -> PResult<Option<Vec<Term>>> {
        if !self.peek().is_some_and(|t| t.kind == TokenKind::LParen) {
            return Ok(None);
        }
        self.bump();
        let mut args = Vec::new();
        if self.peek().is_some_and(|t| t.kind == TokenKind::RParen) {
            self.bump();
            return Ok(Some(args));
        }
        loop {
            args.push(self.term()?);
            match self.peek() {
                Some(t) if t.kind == TokenKind::Comma => {
                    self.bump();
                }
                Some(t) if t.kind == TokenKind::RParen => {
                    self.bump();
                    return Ok(Some(args));
                }
                _ => return Err(self.unexpected(&[",", ")"])),
            }
        }
    }

    fn term(&mut self) -> PResult<Term> {
        match self.peek() {
            Some(t) if t.is_name() => {
                self.bump();
                let args = self.opt_args()?;
                Ok(self.make_term(&t.text, args))
            }
            _ => Err(self.unexpected(&["term"])),
        }
    }

    fn make_term(&self, name: &str, args: Option<Vec<Term>>) -> Term {
        match args {
            Some(args) if !args.is_empty() => Term::Func(name.to_string(), args),
            _ if self.scope.iter().any(|v| v == name) || is_single_lowercase(name) => Term::Var(name.to_string()),
            _ => Term::Const(name.to_string()),
        }
    }
}
