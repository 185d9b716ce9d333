use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::scoring::ScoreRecord;

/// Scores closer than this share a rank.
pub const TIE_TOLERANCE: f64 = 1e-6;

/// Ranks of one record's samples under one ranker. Empty `ranks` marks a
/// missing ranking (for example an unparseable judge reply).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankVector {
    pub record_id: String,
    pub ranker: String,
    pub ranks: Vec<u32>,
}

impl RankVector {
    pub fn is_missing(&self) -> bool {
        self.ranks.is_empty()
    }
}

/// Competition ranking, higher score first. Scores within
/// [`TIE_TOLERANCE`] of their sorted neighbour share that neighbour's rank,
/// so ties chain, and the next rank skips the tied positions: `[0.9, 0.9,
/// 0.2]` gives `[1, 1, 3]`.
pub fn rank(scores: &[f64]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut ranks = vec![0u32; scores.len()];
    let mut current = 1u32;
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 {
            let prev = order[pos - 1];
            if scores[prev] - scores[i] > TIE_TOLERANCE {
                current = pos as u32 + 1;
            }
        }
        ranks[i] = current;
    }
    ranks
}

/// Rank vectors from normalized scores, one per (metric, record), sorted by
/// ranker then record id. Records with fewer than two samples are skipped.
pub fn rank_scores(scores: &[ScoreRecord]) -> Vec<RankVector> {
    let mut groups: BTreeMap<(&str, &str), Vec<(usize, f64)>> = BTreeMap::new();
    for s in scores {
        groups
            .entry((s.metric.as_str(), s.record_id.as_str()))
            .or_default()
            .push((s.sample_index, s.normalized));
    }
    groups
        .into_iter()
        .filter(|(_, v)| v.len() >= 2)
        .map(|((metric, record), mut v)| {
            v.sort_by_key(|&(i, _)| i);
            let values: Vec<f64> = v.iter().map(|&(_, s)| s).collect();
            RankVector {
                record_id: record.to_string(),
                ranker: metric.to_string(),
                ranks: rank(&values),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub ranker_a: String,
    pub ranker_b: String,
    pub rmse: f64,
    pub n_pairs: usize,
    /// Sample pairs skipped because one side had no ranking.
    pub excluded: usize,
    pub pooling: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    #[error("rank sets do not cover the same records: {0}")]
    CoverageMismatch(String),
    #[error("no rank pairs to compare")]
    NoPairs,
    #[error("score lists differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("score lists are empty")]
    Empty,
}

fn ranker_name(v: &[RankVector]) -> String {
    let mut names: Vec<&str> = v.iter().map(|r| r.ranker.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    names.join("+")
}

/// Pooled RMSE over every (record, sample) rank pair. Missing rankings on
/// either side are excluded and counted.
pub fn rmse_alignment(a: &[RankVector], b: &[RankVector]) -> Result<AlignmentReport, RankError> {
    let bmap: HashMap<&str, &RankVector> = b.iter().map(|r| (r.record_id.as_str(), r)).collect();
    if a.len() != b.len() || bmap.len() != b.len() {
        return Err(RankError::CoverageMismatch(format!(
            "{} records vs {} records",
            a.len(),
            b.len()
        )));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    let mut excluded = 0usize;
    for ra in a {
        let rb = bmap
            .get(ra.record_id.as_str())
            .ok_or_else(|| RankError::CoverageMismatch(format!("record {} missing", ra.record_id)))?;
        if ra.is_missing() || rb.is_missing() {
            excluded += ra.ranks.len().max(rb.ranks.len());
            continue;
        }
        if ra.ranks.len() != rb.ranks.len() {
            return Err(RankError::CoverageMismatch(format!(
                "record {} has {} vs {} samples",
                ra.record_id,
                ra.ranks.len(),
                rb.ranks.len()
            )));
        }
        for (x, y) in ra.ranks.iter().zip(&rb.ranks) {
            let d = *x as f64 - *y as f64;
            sum += d * d;
            n += 1;
        }
    }
    if n == 0 {
        return Err(RankError::NoPairs);
    }
    Ok(AlignmentReport {
        ranker_a: ranker_name(a),
        ranker_b: ranker_name(b),
        rmse: (sum / n as f64).sqrt(),
        n_pairs: n,
        excluded,
        pooling: "pooled".into(),
    })
}

/// Mean absolute difference of two equally long score lists.
pub fn disagreement(a: &[f64], b: &[f64]) -> Result<f64, RankError> {
    if a.len() != b.len() {
        return Err(RankError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(RankError::Empty);
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(id: &str, ranker: &str, ranks: &[u32]) -> RankVector {
        RankVector {
            record_id: id.into(),
            ranker: ranker.into(),
            ranks: ranks.to_vec(),
        }
    }

    #[test]
    fn tie_rule() {
        assert_eq!(rank(&[0.9, 0.9, 0.2]), [1, 1, 3]);
        assert_eq!(rank(&[0.9, 0.5, 0.2]), [1, 2, 3]);
        assert_eq!(rank(&[0.5, 0.5, 0.5]), [1, 1, 1]);
        assert_eq!(rank(&[0.2, 0.9, 0.9]), [3, 1, 1]);
        assert_eq!(rank(&[0.1, 0.5, 0.3]), [3, 1, 2]);
        // chained within tolerance
        assert_eq!(rank(&[0.5, 0.5 + 0.9e-6, 0.5 + 1.8e-6]), [1, 1, 1]);
        assert_eq!(rank(&[0.5, 0.5 + 2e-6]), [2, 1]);
    }

    #[test]
    fn rmse_examples() {
        let a = [rv("r", "BS", &[1, 2, 3])];
        let b = [rv("r", "judge", &[3, 2, 1])];
        let rep = rmse_alignment(&a, &b).unwrap();
        assert!((rep.rmse - (8.0f64 / 3.0).sqrt()).abs() < 1e-9);
        assert_eq!((rep.n_pairs, rep.excluded), (3, 0));
        assert_eq!(rmse_alignment(&a, &a).unwrap().rmse, 0.0);
        assert_eq!(rmse_alignment(&b, &a).unwrap().rmse, rep.rmse);
        assert_eq!(rep.pooling, "pooled");
    }

    #[test]
    fn missing_rankings_are_excluded_and_counted() {
        let a = [rv("r1", "BS", &[1, 2, 3]), rv("r2", "BS", &[1, 1, 3])];
        let b = [rv("r1", "judge", &[1, 2, 3]), rv("r2", "judge", &[])];
        let rep = rmse_alignment(&a, &b).unwrap();
        assert_eq!((rep.n_pairs, rep.excluded, rep.rmse), (3, 3, 0.0));
    }

    #[test]
    fn coverage_mismatch() {
        let a = [rv("r1", "BS", &[1, 2, 3])];
        assert!(matches!(
            rmse_alignment(&a, &[rv("r2", "judge", &[1, 2, 3])]),
            Err(RankError::CoverageMismatch(_))
        ));
        assert!(matches!(
            rmse_alignment(&a, &[rv("r1", "judge", &[1, 2])]),
            Err(RankError::CoverageMismatch(_))
        ));
        assert!(matches!(rmse_alignment(&[], &[]), Err(RankError::NoPairs)));
    }

    #[test]
    fn disagreement_examples() {
        assert_eq!(disagreement(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!((disagreement(&[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(disagreement(&[1.0], &[]), Err(RankError::LengthMismatch(1, 0)));
        assert_eq!(disagreement(&[], &[]), Err(RankError::Empty));
    }

    #[test]
    fn ranks_from_scores() {
        let s = |i, v| ScoreRecord {
            record_id: "r".into(),
            metric: "BL".into(),
            sample_index: i,
            raw: v,
            normalized: v,
            flags: vec![],
        };
        let out = rank_scores(&[s(2, 0.2), s(0, 0.9), s(1, 0.9)]);
        assert_eq!(out, [rv("r", "BL", &[1, 1, 3])]);
        assert!(rank_scores(&[s(0, 0.3)]).is_empty());
    }
}
