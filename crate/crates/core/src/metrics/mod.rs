//! Closeness metrics between a reference and a candidate FOL statement.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{parse_str, print, tokenize, Notation};

pub mod logic;
#[cfg(feature = "http")]
pub mod remote;
pub mod semantic;
pub mod smatch;
pub mod text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "BL")]
    Bleu,
    #[serde(rename = "RO")]
    Rouge,
    #[serde(rename = "ME")]
    Meteor,
    #[serde(rename = "LE")]
    LogicalEquivalence,
    #[serde(rename = "BS")]
    BertScore,
    #[serde(rename = "SP")]
    Smatch,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Bleu,
        Metric::Rouge,
        Metric::Meteor,
        Metric::LogicalEquivalence,
        Metric::BertScore,
        Metric::Smatch,
    ];

    /// Two-letter identifier used in score files and tables.
    pub fn abbrev(self) -> &'static str {
        match self {
            Metric::Bleu => "BL",
            Metric::Rouge => "RO",
            Metric::Meteor => "ME",
            Metric::LogicalEquivalence => "LE",
            Metric::BertScore => "BS",
            Metric::Smatch => "SP",
        }
    }

    pub fn cli_name(self) -> &'static str {
        match self {
            Metric::Bleu => "bleu",
            Metric::Rouge => "rouge",
            Metric::Meteor => "meteor",
            Metric::LogicalEquivalence => "le",
            Metric::BertScore => "bertscore",
            Metric::Smatch => "smatchpp",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbrev())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown metric {0:?}")]
pub struct UnknownMetric(pub String);

impl FromStr for Metric {
    type Err = UnknownMetric;

    /// Accepts the CLI name or the two-letter id, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Metric::ALL
            .into_iter()
            .find(|m| m.cli_name() == lower || m.abbrev().eq_ignore_ascii_case(&lower))
            .or(match lower.as_str() {
                "smatch" => Some(Metric::Smatch),
                "bs" => Some(Metric::BertScore),
                _ => None,
            })
            .ok_or_else(|| UnknownMetric(s.to_string()))
    }
}

/// Token sequence fed to the text and embedding metrics.
///
/// Parseable input is tokenized from its canonical unicode print, so
/// notation and spacing differences vanish. Unparseable input falls back to
/// lexing the raw string, then to whitespace splitting.
pub fn metric_tokens(source: &str, split_camel_case: bool) -> Vec<String> {
    let lexemes = match parse_str(source) {
        Ok(f) => tokenize(&print(&f, Notation::Unicode), Notation::Unicode)
            .map(|t| t.lexemes())
            .unwrap_or_default(),
        Err(_) => match tokenize(source, Notation::Mixed) {
            Ok(t) => t.lexemes(),
            Err(_) => source.split_whitespace().map(str::to_string).collect(),
        },
    };
    if split_camel_case {
        lexemes.iter().flat_map(|t| split_camel(t)).collect()
    } else {
        lexemes
    }
}

/// Splits `WantToBeAddictedTo` into `Want To Be Addicted To`. Tokens without
/// an internal case change are returned whole.
pub fn split_camel(token: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut cur = String::new();
    let mut prev_lower = false;
    for c in token.chars() {
        if c.is_uppercase() && prev_lower && !cur.is_empty() {
            parts.push(std::mem::take(&mut cur));
        }
        prev_lower = c.is_lowercase() || c.is_ascii_digit();
        cur.push(c);
    }
    if !cur.is_empty() {
        parts.push(cur);
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.cli_name().parse::<Metric>().unwrap(), m);
            assert_eq!(m.abbrev().parse::<Metric>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.abbrev()));
        }
        assert!("cider".parse::<Metric>().is_err());
    }

    #[test]
    fn tokens_are_notation_independent() {
        let a = metric_tokens("forall x (Eel(x) -> Fish(x))", false);
        let b = metric_tokens("∀x(Eel(x)→Fish(x))", false);
        assert_eq!(a, b);
        assert_eq!(a.len(), 13);
    }

    #[test]
    fn unparseable_input_still_tokenizes() {
        assert_eq!(metric_tokens("∀x (P(x", false), ["∀", "x", "(", "P", "(", "x"]);
        assert_eq!(metric_tokens("P ⇒ Q", false), ["P", "⇒", "Q"]);
    }

    #[test]
    fn camel_case_split() {
        assert_eq!(
            split_camel("WantToBeAddictedTo"),
            ["Want", "To", "Be", "Addicted", "To"]
        );
        assert_eq!(split_camel("IsEel"), ["Is", "Eel"]);
        assert_eq!(split_camel("ABC"), ["ABC"]);
        assert_eq!(split_camel("∀"), ["∀"]);
        let t = metric_tokens("IsEel(x)", true);
        assert_eq!(t, ["Is", "Eel", "(", "x", ")"]);
    }
}
