//! Browser bindings. Every export takes strings and returns a JSON string;
//! errors surface as thrown JS errors carrying the library message.

use std::collections::BTreeMap;

use foleval::harness::{score_pair, ScoringConfig};
use foleval::metrics::semantic::HashedTrigramEmbedder;
use foleval::metrics::Metric;
use foleval::perturb::PerturbationKind;
use foleval::syntax::{print, print_with, profile, Parens};
use foleval::{parse_str, Notation};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Normalized {
    unicode: String,
    ascii: String,
    fully_parenthesized: String,
    operators: BTreeMap<&'static str, usize>,
    total_operators: usize,
}

#[derive(Serialize)]
struct Perturbed {
    kind: PerturbationKind,
    applied: bool,
    sites: usize,
    result: Option<String>,
}

#[derive(Serialize)]
struct PairScore {
    metric: &'static str,
    name: &'static str,
    raw: f64,
    normalized: f64,
    flags: Vec<String>,
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

pub fn normalize_json(source: &str) -> Result<String, String> {
    let f = parse_str(source).map_err(|e| e.to_string())?;
    let p = profile(&f);
    to_json(&Normalized {
        unicode: print(&f, Notation::Unicode),
        ascii: print(&f, Notation::Ascii),
        fully_parenthesized: print_with(&f, Notation::Unicode, Parens::Full),
        operators: p.counts.iter().map(|(k, n)| (k.name(), *n)).collect(),
        total_operators: p.total,
    })
}

pub fn perturb_json(kind: &str, source: &str) -> Result<String, String> {
    let kind: PerturbationKind = kind.parse().map_err(|e| format!("{e}"))?;
    let f = parse_str(source).map_err(|e| e.to_string())?;
    let out = kind.apply(&f);
    to_json(&Perturbed {
        kind,
        applied: out.applied(),
        sites: out.sites,
        result: out.result.map(|g| print(&g, Notation::Unicode)),
    })
}

/// All six metrics with the in-process embedder and the default seed.
pub fn score_pair_json(gold: &str, candidate: &str) -> Result<String, String> {
    if gold.trim().is_empty() {
        return Err("gold statement is empty".into());
    }
    let cfg = ScoringConfig::with_seed(17);
    let provider = HashedTrigramEmbedder::default();
    let rows = Metric::ALL
        .into_iter()
        .map(|m| {
            let s = score_pair(m, gold, candidate, &cfg, &provider).map_err(|e| e.to_string())?;
            Ok(PairScore {
                metric: m.abbrev(),
                name: m.cli_name(),
                raw: s.raw,
                normalized: s.normalized,
                flags: s.flags,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    to_json(&rows)
}

/// Canonical prints and operator counts of a statement.
#[wasm_bindgen]
pub fn normalize(source: &str) -> Result<String, JsError> {
    normalize_json(source).map_err(|e| JsError::new(&e))
}

/// Applies one perturbation kind, such as `op-negation`.
#[wasm_bindgen]
pub fn perturb(kind: &str, source: &str) -> Result<String, JsError> {
    perturb_json(kind, source).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = scorePair)]
pub fn score_pair_js(gold: &str, candidate: &str) -> Result<String, JsError> {
    score_pair_json(gold, candidate).map_err(|e| JsError::new(&e))
}

/// Perturbation ids in display order.
#[wasm_bindgen(js_name = perturbationKinds)]
pub fn perturbation_kinds() -> Vec<String> {
    PerturbationKind::ALL.iter().map(|k| k.id().to_string()).collect()
}
