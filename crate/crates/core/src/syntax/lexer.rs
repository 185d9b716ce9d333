use std::collections::HashSet;
use std::fmt;
use std::ops::Deref;

use thiserror::Error;

use super::Notation;

/// Byte offsets `[start, end)` into the source string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Quantifier,
    /// `∧ ∨ → ↔`
    Connective,
    Negation,
    Equality,
    Xor,
    /// Predicate or function name, or a propositional atom.
    Identifier,
    Variable,
    Constant,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    /// The lexeme with ASCII operator aliases mapped to their unicode glyph.
    pub fn canonical(&self) -> &str {
        match self.text.as_str() {
            "forall" => "∀",
            "exists" => "∃",
            "~" => "¬",
            "&" => "∧",
            "|" => "∨",
            "->" => "→",
            "<->" => "↔",
            "xor" => "⊕",
            other => other,
        }
    }

    pub fn is_name(&self) -> bool {
        matches!(
            self.kind,
            TokenKind::Identifier | TokenKind::Variable | TokenKind::Constant
        )
    }
}

/// Token stream produced by [`tokenize`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSeq(Vec<Token>);

impl TokenSeq {
    pub fn into_inner(self) -> Vec<Token> {
        self.0
    }

    /// Canonical (unicode) lexemes, one per token.
    pub fn lexemes(&self) -> Vec<String> {
        self.0.iter().map(|t| t.canonical().to_string()).collect()
    }
}

impl Deref for TokenSeq {
    type Target = [Token];

    fn deref(&self) -> &[Token] {
        &self.0
    }
}

impl From<Vec<Token>> for TokenSeq {
    fn from(v: Vec<Token>) -> Self {
        TokenSeq(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unrecognized input {found:?} at {span}")]
pub struct LexError {
    pub span: Span,
    pub found: String,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Split `source` into tokens under the given notation.
///
/// Names are classified from the token stream alone: a name followed by `(`
/// is an identifier, a name in term position is a variable when it is bound
/// by some quantifier or is a single lowercase letter, and a constant
/// otherwise. The parser makes the scope-accurate decision.
pub fn tokenize(source: &str, notation: Notation) -> Result<TokenSeq, LexError> {
    let unicode = notation != Notation::Ascii;
    let ascii = notation != Notation::Unicode;
    let mut raw: Vec<Token> = Vec::new();
    let mut chars = source.char_indices().peekable();

    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let rest = &source[start..];
        let single = |kind| Some((kind, c.len_utf8()));
        let op: Option<(TokenKind, usize)> = match c {
            '(' => single(TokenKind::LParen),
            ')' => single(TokenKind::RParen),
            ',' => single(TokenKind::Comma),
            '=' => single(TokenKind::Equality),
            '∀' | '∃' if unicode => single(TokenKind::Quantifier),
            '¬' if unicode => single(TokenKind::Negation),
            '∧' | '∨' | '→' | '↔' if unicode => single(TokenKind::Connective),
            '⊕' if unicode => single(TokenKind::Xor),
            '~' if ascii => single(TokenKind::Negation),
            '&' | '|' if ascii => single(TokenKind::Connective),
            '-' if ascii && rest.starts_with("->") => Some((TokenKind::Connective, 2)),
            '<' if ascii && rest.starts_with("<->") => Some((TokenKind::Connective, 3)),
            _ => None,
        };
        if let Some((kind, len)) = op {
            for _ in rest[..len].chars() {
                chars.next();
            }
            raw.push(Token {
                kind,
                text: rest[..len].to_string(),
                span: Span::new(start, start + len),
            });
            continue;
        }
        if is_name_char(c) {
            let mut end = start;
            while let Some(&(i, ch)) = chars.peek() {
                if !is_name_char(ch) {
                    break;
                }
                end = i + ch.len_utf8();
                chars.next();
            }
            let text = &source[start..end];
            let kind = match text {
                "forall" | "exists" if ascii => TokenKind::Quantifier,
                "xor" if ascii => TokenKind::Xor,
                _ => TokenKind::Identifier,
            };
            raw.push(Token {
                kind,
                text: text.to_string(),
                span: Span::new(start, end),
            });
            continue;
        }
        return Err(LexError {
            span: Span::new(start, start + c.len_utf8()),
            found: c.to_string(),
        });
    }

    classify_names(&mut raw);
    Ok(TokenSeq(raw))
}

fn classify_names(tokens: &mut [Token]) {
    let bound: HashSet<String> = tokens
        .windows(2)
        .filter(|w| w[0].kind == TokenKind::Quantifier && w[1].kind == TokenKind::Identifier)
        .map(|w| w[1].text.clone())
        .collect();

    // true = argument list, false = grouping
    let mut parens: Vec<bool> = Vec::new();
    for i in 0..tokens.len() {
        let next = tokens.get(i + 1).map(|t| t.kind);
        let prev = if i > 0 { Some(tokens[i - 1].kind) } else { None };
        match tokens[i].kind {
            TokenKind::LParen => {
                let after_name = i > 0 && tokens[i - 1].kind == TokenKind::Identifier;
                parens.push(after_name);
                continue;
            }
            TokenKind::RParen => {
                parens.pop();
                continue;
            }
            TokenKind::Identifier => {}
            _ => continue,
        }
        let text = &tokens[i].text;
        let kind = if prev == Some(TokenKind::Quantifier) {
            TokenKind::Variable
        } else if next == Some(TokenKind::LParen) {
            TokenKind::Identifier
        } else if parens.last() == Some(&true) || next == Some(TokenKind::Equality) || prev == Some(TokenKind::Equality)
        {
            if bound.contains(text) || is_single_lowercase(text) {
                TokenKind::Variable
            } else {
                TokenKind::Constant
            }
        } else {
            TokenKind::Identifier
        };
        tokens[i].kind = kind;
    }
}

pub(crate) fn is_single_lowercase(name: &str) -> bool {
    let mut it = name.chars();
    matches!((it.next(), it.next()), (Some(c), None) if c.is_lowercase())
}
