//! Closeness metrics for first-order logic statements.
//!
//! * [`syntax`]: lexing, parsing and printing over the nine-operator alphabet.
//! * [`perturb`]: operator and text perturbations of ground-truth formulas.
//! * [`metrics`]: BLEU, ROUGE-L, METEOR, logical equivalence, Smatch-style
//!   triple F1 and BERTScore-style greedy embedding matching.
//! * [`harness`]: corpus ingestion, normalization, combination, tie-aware
//!   ranking, judge alignment and reporting.

pub mod harness;
pub mod metrics;
pub mod perturb;
pub mod syntax;

pub use syntax::{parse_str, Formula, Notation, Term};
