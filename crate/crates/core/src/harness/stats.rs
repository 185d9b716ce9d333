use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::corpus::Record;
use crate::perturb::{applicability_report, Applicability};
use crate::syntax::{parse_str, profile, OperatorKind};

/// Operator-count buckets: `0` through `6`, then `7+`.
pub const HISTOGRAM_BUCKETS: [&str; 8] = ["0", "1", "2", "3", "4", "5", "6", "7+"];

pub fn histogram_bucket(operators: usize) -> &'static str {
    HISTOGRAM_BUCKETS[operators.min(7)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub records: usize,
    pub parse_failures: usize,
    /// Records per operator-count bucket, over parsed gold formulas.
    pub histogram: BTreeMap<String, usize>,
    /// Total occurrences of each operator.
    pub operators: BTreeMap<String, usize>,
    /// Applicability over parsed gold formulas; empty when none parse.
    pub applicability: Vec<Applicability>,
}

impl CorpusStats {
    /// Bucket with the most records, lowest bucket on ties.
    pub fn mode(&self) -> Option<&str> {
        HISTOGRAM_BUCKETS
            .iter()
            .copied()
            .filter(|b| self.histogram.get(*b).copied().unwrap_or(0) > 0)
            .max_by_key(|b| (self.histogram[*b], std::cmp::Reverse(*b)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("corpus is empty")]
    EmptyCorpus,
}

pub fn corpus_stats(corpus: &[Record]) -> Result<CorpusStats, StatsError> {
    if corpus.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let mut histogram: BTreeMap<String, usize> = HISTOGRAM_BUCKETS.iter().map(|b| (b.to_string(), 0)).collect();
    let mut operators: BTreeMap<String, usize> = OperatorKind::ALL.iter().map(|o| (o.name().to_string(), 0)).collect();
    let mut parsed = Vec::new();
    for r in corpus {
        if let Ok(f) = parse_str(&r.gold) {
            let p = profile(&f);
            *histogram.entry(histogram_bucket(p.total).to_string()).or_default() += 1;
            for (op, n) in &p.counts {
                *operators.entry(op.name().to_string()).or_default() += n;
            }
            parsed.push(f);
        }
    }
    let applicability = applicability_report(&parsed)
        .map(|m| m.into_values().collect())
        .unwrap_or_default();
    Ok(CorpusStats {
        records: corpus.len(),
        parse_failures: corpus.len() - parsed.len(),
        histogram,
        operators,
        applicability,
    })
}
