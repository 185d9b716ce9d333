use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::corpus::Record;
use super::par_map;
use crate::metrics::logic::{le_score, syntax_check, LeConfig, LeError};
use crate::metrics::semantic::{bertscore, EmbedError, EmbeddingProvider, TokenEmbeddings};
use crate::metrics::smatch::{smatch_formulas, SmatchConfig};
use crate::metrics::text::{bleu, meteor, rouge, TextMetricConfig};
use crate::metrics::{metric_tokens, Metric};
use crate::syntax::Formula;

/// Divisor used to turn raw scores into normalized ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Each record's own `metric(gold, gold)`.
    #[default]
    PerRecord,
    /// The corpus mean of `metric(gold, gold)`.
    CorpusMean,
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-record" => Ok(Normalization::PerRecord),
            "corpus-mean" => Ok(Normalization::CorpusMean),
            other => Err(format!(
                "unknown normalization {other:?} (expected per-record or corpus-mean)"
            )),
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::PerRecord => "per-record",
            Normalization::CorpusMean => "corpus-mean",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoringConfig {
    pub text: TextMetricConfig,
    pub le: LeConfig,
    pub smatch: SmatchConfig,
    pub normalization: Normalization,
    /// Worker threads; `None` uses the available parallelism.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl ScoringConfig {
    /// Routes one seed to every randomized component.
    pub fn with_seed(seed: u64) -> Self {
        let mut cfg = ScoringConfig::default();
        cfg.le.seed = seed;
        cfg.smatch.seed = seed;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub record_id: String,
    /// A metric id such as `BL`, or a combined id such as `BS-LE`.
    pub metric: String,
    pub sample_index: usize,
    pub raw: f64,
    /// In `[0, 1]`.
    pub normalized: f64,
    #[serde(default)]
    pub flags: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("no metrics requested")]
    EmptyMetrics,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("cannot combine {a} and {b}: scores are not paired")]
    MismatchedPair { a: String, b: String },
    #[error("invalid text metric config: {0}")]
    Config(String),
}

pub const FLAG_EMPTY: &str = "empty";
pub const FLAG_SYNTAX_INVALID: &str = "syntax-invalid";
pub const FLAG_GOLD_INVALID: &str = "gold-invalid";
pub const FLAG_UNPARSEABLE: &str = "unparseable";
pub const FLAG_GROUNDING_OVERFLOW: &str = "grounding-overflow";
pub const FLAG_ZERO_SELF_MATCH: &str = "zero-self-match";

/// A statement prepared once for every metric.
struct Prepared {
    tokens: Vec<String>,
    formula: Option<Formula>,
    valid: bool,
}

impl Prepared {
    fn new(source: &str, cfg: &ScoringConfig) -> Self {
        let check = syntax_check(source);
        Prepared {
            tokens: metric_tokens(source, cfg.text.split_camel_case),
            valid: check.valid,
            formula: check.formula,
        }
    }
}

type EmbedCache = HashMap<Vec<String>, TokenEmbeddings>;

fn raw_score(
    metric: Metric,
    gold: &Prepared,
    cand: &Prepared,
    cfg: &ScoringConfig,
    cache: &EmbedCache,
) -> (f64, Vec<String>) {
    let flagged = |f: &str| (0.0, vec![f.to_string()]);
    match metric {
        Metric::Bleu | Metric::Rouge | Metric::Meteor => {
            if gold.tokens.is_empty() || cand.tokens.is_empty() {
                return flagged(FLAG_EMPTY);
            }
            let f = match metric {
                Metric::Bleu => bleu,
                Metric::Rouge => rouge,
                _ => meteor,
            };
            // config is validated before scoring starts
            (f(&gold.tokens, &cand.tokens, &cfg.text).unwrap_or(0.0), Vec::new())
        }
        Metric::LogicalEquivalence => {
            let (Some(g), Some(c)) = (
                gold.formula.as_ref().filter(|_| gold.valid),
                cand.formula.as_ref().filter(|_| cand.valid),
            ) else {
                return flagged(if gold.valid {
                    FLAG_SYNTAX_INVALID
                } else {
                    FLAG_GOLD_INVALID
                });
            };
            match le_score(g, c, &cfg.le) {
                Ok(s) => (s, Vec::new()),
                Err(LeError::GroundingOverflow { .. }) => flagged(FLAG_GROUNDING_OVERFLOW),
                Err(_) => flagged(FLAG_SYNTAX_INVALID),
            }
        }
        Metric::Smatch => match (&gold.formula, &cand.formula) {
            (Some(g), Some(c)) => (smatch_formulas(g, c, &cfg.smatch).f1, Vec::new()),
            _ => flagged(FLAG_UNPARSEABLE),
        },
        Metric::BertScore => match (cache.get(&gold.tokens), cache.get(&cand.tokens)) {
            (Some(g), Some(c)) => match bertscore(g, c) {
                Ok(s) => (s.score, Vec::new()),
                Err(_) => flagged(FLAG_EMPTY),
            },
            _ => flagged(FLAG_EMPTY),
        },
    }
}

fn embed_all(
    token_seqs: Vec<Vec<String>>,
    provider: &dyn EmbeddingProvider,
    workers: Option<usize>,
) -> Result<EmbedCache, EmbedError> {
    let mut unique: Vec<Vec<String>> = token_seqs.into_iter().filter(|t| !t.is_empty()).collect();
    unique.sort();
    unique.dedup();
    let chunks: Vec<&[Vec<String>]> = unique.chunks(32).collect();
    let embedded = par_map(&chunks, workers, |c| provider.embed_batch(c));
    let mut cache = EmbedCache::new();
    for (chunk, result) in chunks.into_iter().zip(embedded) {
        for (tokens, e) in chunk.iter().zip(result?) {
            cache.insert(tokens.clone(), e);
        }
    }
    Ok(cache)
}

fn check_config(cfg: &ScoringConfig) -> Result<(), ScoreError> {
    cfg.text.validate().map_err(|e| ScoreError::Config(e.to_string()))?;
    cfg.le.validate().map_err(|e| ScoreError::Config(e.to_string()))
}

/// Mean raw `metric(gold, gold)` over the corpus.
pub fn self_match_constant(
    metric: Metric,
    corpus: &[Record],
    cfg: &ScoringConfig,
    provider: &dyn EmbeddingProvider,
) -> Result<f64, ScoreError> {
    if corpus.is_empty() {
        return Err(ScoreError::EmptyCorpus);
    }
    check_config(cfg)?;
    let prepared: Vec<Prepared> = corpus.iter().map(|r| Prepared::new(&r.gold, cfg)).collect();
    let cache = if metric == Metric::BertScore {
        embed_all(
            prepared.iter().map(|p| p.tokens.clone()).collect(),
            provider,
            cfg.workers,
        )?
    } else {
        EmbedCache::new()
    };
    let sum: f64 = prepared.iter().map(|p| raw_score(metric, p, p, cfg, &cache).0).sum();
    Ok(sum / corpus.len() as f64)
}

fn normalize(raw: f64, divisor: f64, flags: &mut Vec<String>) -> f64 {
    if divisor > 0.0 {
        (raw / divisor).clamp(0.0, 1.0)
    } else {
        if !flags.iter().any(|f| f == FLAG_ZERO_SELF_MATCH) {
            flags.push(FLAG_ZERO_SELF_MATCH.to_string());
        }
        0.0
    }
}

/// One score per (record, metric, sample), sorted by record id, metric id
/// and sample index.
pub fn score_corpus(
    corpus: &[Record],
    metrics: &[Metric],
    cfg: &ScoringConfig,
    provider: &dyn EmbeddingProvider,
) -> Result<Vec<ScoreRecord>, ScoreError> {
    if metrics.is_empty() {
        return Err(ScoreError::EmptyMetrics);
    }
    check_config(cfg)?;
    let mut metrics = metrics.to_vec();
    metrics.sort_by_key(|m| m.abbrev());
    metrics.dedup();

    let prepared: Vec<(Prepared, Vec<Prepared>)> = par_map(corpus, cfg.workers, |r| {
        (
            Prepared::new(&r.gold, cfg),
            r.samples.iter().map(|s| Prepared::new(s, cfg)).collect(),
        )
    });
    let cache = if metrics.contains(&Metric::BertScore) {
        let seqs = prepared
            .iter()
            .flat_map(|(g, ss)| std::iter::once(g).chain(ss).map(|p| p.tokens.clone()))
            .collect();
        embed_all(seqs, provider, cfg.workers)?
    } else {
        EmbedCache::new()
    };

    let self_raw: Vec<Vec<f64>> = par_map(&prepared, cfg.workers, |(g, _)| {
        metrics.iter().map(|&m| raw_score(m, g, g, cfg, &cache).0).collect()
    });
    let divisors: Vec<Vec<f64>> = match cfg.normalization {
        Normalization::PerRecord => self_raw,
        Normalization::CorpusMean => {
            let n = self_raw.len().max(1) as f64;
            let means: Vec<f64> = (0..metrics.len())
                .map(|k| self_raw.iter().map(|row| row[k]).sum::<f64>() / n)
                .collect();
            vec![means; prepared.len()]
        }
    };

    let indices: Vec<usize> = (0..corpus.len()).collect();
    let per_record: Vec<Vec<ScoreRecord>> = par_map(&indices, cfg.workers, |&i| {
        let (g, samples) = &prepared[i];
        let mut out = Vec::new();
        for (k, &m) in metrics.iter().enumerate() {
            for (j, s) in samples.iter().enumerate() {
                let (raw, mut flags) = raw_score(m, g, s, cfg, &cache);
                let normalized = normalize(raw, divisors[i][k], &mut flags);
                out.push(ScoreRecord {
                    record_id: corpus[i].id.clone(),
                    metric: m.abbrev().to_string(),
                    sample_index: j,
                    raw,
                    normalized,
                    flags,
                });
            }
        }
        out
    });
    let mut all: Vec<ScoreRecord> = per_record.into_iter().flatten().collect();
    sort_scores(&mut all);
    Ok(all)
}

pub fn sort_scores(scores: &mut [ScoreRecord]) {
    scores.sort_by(|a, b| (&a.record_id, &a.metric, a.sample_index).cmp(&(&b.record_id, &b.metric, b.sample_index)));
}

/// Raw and normalized score of one candidate against one gold statement.
pub fn score_pair(
    metric: Metric,
    gold: &str,
    cand: &str,
    cfg: &ScoringConfig,
    provider: &dyn EmbeddingProvider,
) -> Result<ScoreRecord, ScoreError> {
    let record = Record {
        id: String::new(),
        nl: String::new(),
        gold: gold.to_string(),
        samples: vec![cand.to_string()],
    };
    let cfg = ScoringConfig {
        normalization: Normalization::PerRecord,
        workers: Some(1),
        ..cfg.clone()
    };
    let mut out = score_corpus(std::slice::from_ref(&record), &[metric], &cfg, provider)?;
    Ok(out.remove(0))
}

/// Identifier of a combined metric: the two ids in alphabetical order.
pub fn combined_id(a: &str, b: &str) -> String {
    if a <= b {
        format!("{a}-{b}")
    } else {
        format!("{b}-{a}")
    }
}

/// Weighted mean of two paired scores; `weight_a` applies to `a`.
pub fn combine(a: &ScoreRecord, b: &ScoreRecord, weight_a: f64) -> Result<ScoreRecord, ScoreError> {
    if a.record_id != b.record_id || a.sample_index != b.sample_index {
        return Err(ScoreError::MismatchedPair {
            a: format!("{}#{}", a.record_id, a.sample_index),
            b: format!("{}#{}", b.record_id, b.sample_index),
        });
    }
    let mix = |x: f64, y: f64| {
        if weight_a == 0.5 {
            (x + y) / 2.0
        } else {
            weight_a * x + (1.0 - weight_a) * y
        }
    };
    let mut flags: Vec<String> = a.flags.iter().chain(&b.flags).cloned().collect();
    flags.sort();
    flags.dedup();
    Ok(ScoreRecord {
        record_id: a.record_id.clone(),
        metric: combined_id(&a.metric, &b.metric),
        sample_index: a.sample_index,
        raw: mix(a.raw, b.raw),
        normalized: mix(a.normalized, b.normalized).clamp(0.0, 1.0),
        flags,
    })
}

/// Combines every paired score of metrics `a` and `b`.
pub fn combine_scores(scores: &[ScoreRecord], a: &str, b: &str, weight_a: f64) -> Result<Vec<ScoreRecord>, ScoreError> {
    let index: HashMap<(&str, &str, usize), &ScoreRecord> = scores
        .iter()
        .map(|s| ((s.record_id.as_str(), s.metric.as_str(), s.sample_index), s))
        .collect();
    let mut out = Vec::new();
    for s in scores.iter().filter(|s| s.metric == a) {
        let other =
            index
                .get(&(s.record_id.as_str(), b, s.sample_index))
                .ok_or_else(|| ScoreError::MismatchedPair {
                    a: format!("{}#{}#{}", s.record_id, a, s.sample_index),
                    b: format!("{}#{}#{}", s.record_id, b, s.sample_index),
                })?;
        out.push(combine(s, other, weight_a)?);
    }
    if out.len() != scores.iter().filter(|s| s.metric == b).count() {
        return Err(ScoreError::MismatchedPair {
            a: a.to_string(),
            b: b.to_string(),
        });
    }
    sort_scores(&mut out);
    Ok(out)
}
