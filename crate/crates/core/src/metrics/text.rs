//! Sentence-level n-gram and alignment metrics over FOL token sequences.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextMetricConfig {
    pub bleu_max_n: usize,
    /// Add-k smoothing applied to the n >= 2 precisions.
    pub bleu_smoothing_k: f64,
    pub meteor_alpha: f64,
    pub meteor_beta: f64,
    pub meteor_gamma: f64,
    pub split_camel_case: bool,
}

impl Default for TextMetricConfig {
    fn default() -> Self {
        TextMetricConfig {
            bleu_max_n: 4,
            bleu_smoothing_k: 1.0,
            meteor_alpha: 0.9,
            meteor_beta: 3.0,
            meteor_gamma: 0.5,
            split_camel_case: false,
        }
    }
}

impl TextMetricConfig {
    pub fn validate(&self) -> Result<(), TextMetricError> {
        if self.bleu_max_n < 1 {
            return Err(TextMetricError::InvalidConfig("bleu_max_n must be >= 1"));
        }
        if !(self.meteor_alpha > 0.0 && self.meteor_alpha < 1.0) {
            return Err(TextMetricError::InvalidConfig("meteor_alpha must lie in (0, 1)"));
        }
        if self.bleu_smoothing_k < 0.0 {
            return Err(TextMetricError::InvalidConfig("bleu_smoothing_k must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextMetricError {
    #[error("empty token sequence")]
    EmptySequence,
    #[error("invalid text metric config: {0}")]
    InvalidConfig(&'static str),
}

/// Numerator used for a unigram precision with no matches, so that disjoint
/// sequences score a small positive value instead of zero.
pub const BLEU_UNIGRAM_FLOOR: f64 = 0.1;

fn check(reference: &[String], candidate: &[String], cfg: &TextMetricConfig) -> Result<(), TextMetricError> {
    cfg.validate()?;
    if reference.is_empty() || candidate.is_empty() {
        return Err(TextMetricError::EmptySequence);
    }
    Ok(())
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Sentence BLEU: geometric mean of clipped n-gram precisions times the
/// brevity penalty.
pub fn bleu(reference: &[String], candidate: &[String], cfg: &TextMetricConfig) -> Result<f64, TextMetricError> {
    check(reference, candidate, cfg)?;
    let mut log_sum = 0.0;
    for n in 1..=cfg.bleu_max_n {
        let cand = ngram_counts(candidate, n);
        let refc = ngram_counts(reference, n);
        let total: usize = cand.values().sum();
        let matched: usize = cand
            .iter()
            .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
            .sum();
        let p = if n == 1 {
            if matched == 0 {
                BLEU_UNIGRAM_FLOOR / total as f64
            } else {
                matched as f64 / total as f64
            }
        } else {
            let k = cfg.bleu_smoothing_k;
            if total as f64 + k == 0.0 {
                1.0
            } else if matched == 0 && k == 0.0 {
                return Ok(0.0);
            } else {
                (matched as f64 + k) / (total as f64 + k)
            }
        };
        log_sum += p.ln();
    }
    let c = candidate.len() as f64;
    let r = reference.len() as f64;
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    Ok((bp * (log_sum / cfg.bleu_max_n as f64).exp()).clamp(0.0, 1.0))
}

/// Length of the longest common subsequence.
pub fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L: F-measure of LCS precision and recall, equally weighted.
pub fn rouge(reference: &[String], candidate: &[String], cfg: &TextMetricConfig) -> Result<f64, TextMetricError> {
    check(reference, candidate, cfg)?;
    let lcs = lcs_len(reference, candidate) as f64;
    if lcs == 0.0 {
        return Ok(0.0);
    }
    let p = lcs / candidate.len() as f64;
    let r = lcs / reference.len() as f64;
    Ok(2.0 * p * r / (p + r))
}

/// Result of the METEOR unigram alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeteorAlignment {
    pub matches: usize,
    pub chunks: usize,
}

const METEOR_SEARCH_BUDGET: usize = 200_000;

/// Exact-match alignment with the most matches and, among those, the fewest
/// chunks. Branch and bound over candidate positions; on very long inputs the
/// search stops after a fixed node budget and keeps the best alignment found.
pub fn meteor_alignment(reference: &[String], candidate: &[String]) -> MeteorAlignment {
    let mut ref_positions: HashMap<&str, Vec<usize>> = HashMap::new();
    for (j, t) in reference.iter().enumerate() {
        ref_positions.entry(t).or_default().push(j);
    }
    let mut cand_counts: HashMap<&str, usize> = HashMap::new();
    for t in candidate {
        *cand_counts.entry(t).or_default() += 1;
    }
    // how many candidate occurrences of each token may stay unaligned
    let mut skips: HashMap<&str, usize> = HashMap::new();
    let mut matches = 0;
    for (t, &c) in &cand_counts {
        let r = ref_positions.get(t).map_or(0, Vec::len);
        matches += c.min(r);
        skips.insert(t, c - c.min(r));
    }
    if matches == 0 {
        return MeteorAlignment { matches: 0, chunks: 0 };
    }

    let ref_bigrams: std::collections::HashSet<(&str, &str)> =
        reference.windows(2).map(|w| (w[0].as_str(), w[1].as_str())).collect();
    // suffix count of positions that could extend a chunk
    let mut can_extend = vec![0usize; candidate.len() + 1];
    for k in (0..candidate.len()).rev() {
        let ok = k > 0 && ref_bigrams.contains(&(candidate[k - 1].as_str(), candidate[k].as_str()));
        can_extend[k] = can_extend[k + 1] + usize::from(ok);
    }

    struct Search<'a> {
        candidate: &'a [String],
        ref_positions: HashMap<&'a str, Vec<usize>>,
        can_extend: Vec<usize>,
        used: Vec<bool>,
        skips: HashMap<&'a str, usize>,
        best: Option<usize>,
        nodes: usize,
    }

    impl Search<'_> {
        fn run(&mut self, i: usize, prev: Option<usize>, adj: usize) {
            self.nodes += 1;
            if i == self.candidate.len() {
                if self.best.is_none_or(|b| adj > b) {
                    self.best = Some(adj);
                }
                return;
            }
            if let Some(b) = self.best {
                if adj + self.can_extend[i] <= b || self.nodes > METEOR_SEARCH_BUDGET {
                    return;
                }
            }
            let tok = self.candidate[i].as_str();
            let mut options: Vec<usize> = self
                .ref_positions
                .get(tok)
                .map(|ps| ps.iter().copied().filter(|&j| !self.used[j]).collect())
                .unwrap_or_default();
            if let Some(p) = prev {
                if let Some(pos) = options.iter().position(|&j| j == p + 1) {
                    options.swap(0, pos);
                    options[1..].sort_unstable();
                }
            }
            for j in options {
                self.used[j] = true;
                let extends = prev.is_some_and(|p| p + 1 == j);
                self.run(i + 1, Some(j), adj + usize::from(extends));
                self.used[j] = false;
            }
            let left = self.skips.get(tok).copied().unwrap_or(0);
            if left > 0 {
                self.skips.insert(tok, left - 1);
                self.run(i + 1, None, adj);
                self.skips.insert(tok, left);
            }
        }
    }

    let mut search = Search {
        candidate,
        ref_positions,
        can_extend,
        used: vec![false; reference.len()],
        skips,
        best: None,
        nodes: 0,
    };
    search.run(0, None, 0);
    let adj = search.best.expect("search always reaches a leaf first");
    MeteorAlignment {
        matches,
        chunks: matches - adj,
    }
}

/// METEOR with exact matching only: recall-weighted F-mean times a
/// fragmentation penalty.
pub fn meteor(reference: &[String], candidate: &[String], cfg: &TextMetricConfig) -> Result<f64, TextMetricError> {
    check(reference, candidate, cfg)?;
    let MeteorAlignment { matches, chunks } = meteor_alignment(reference, candidate);
    Ok(meteor_from_counts(
        matches,
        chunks,
        reference.len(),
        candidate.len(),
        cfg,
    ))
}

pub(crate) fn meteor_from_counts(
    matches: usize,
    chunks: usize,
    ref_len: usize,
    cand_len: usize,
    cfg: &TextMetricConfig,
) -> f64 {
    if matches == 0 {
        return 0.0;
    }
    let m = matches as f64;
    let p = m / cand_len as f64;
    let r = m / ref_len as f64;
    let fmean = p * r / (cfg.meteor_alpha * p + (1.0 - cfg.meteor_alpha) * r);
    let penalty = cfg.meteor_gamma * (chunks as f64 / m).powf(cfg.meteor_beta);
    fmean * (1.0 - penalty)
}

/// Value of METEOR on an identical pair of length `len`: one chunk.
pub fn meteor_self_match(len: usize, cfg: &TextMetricConfig) -> f64 {
    meteor_from_counts(len, 1, len, len, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::metric_tokens;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn cfg() -> TextMetricConfig {
        TextMetricConfig::default()
    }

    /// Independent n-gram oracle: counts by linear scan instead of hashing.
    fn bleu_oracle(r: &[String], c: &[String], max_n: usize, k: f64) -> f64 {
        let grams = |t: &[String], n: usize| -> Vec<Vec<String>> {
            (0..=t.len().saturating_sub(n))
                .filter(|&i| i + n <= t.len())
                .map(|i| t[i..i + n].to_vec())
                .collect()
        };
        let mut prod = 1.0;
        for n in 1..=max_n {
            let cg = grams(c, n);
            let mut rg = grams(r, n);
            let mut m = 0;
            for g in &cg {
                if let Some(pos) = rg.iter().position(|x| x == g) {
                    rg.remove(pos);
                    m += 1;
                }
            }
            let p = if n == 1 {
                m as f64 / cg.len() as f64
            } else {
                (m as f64 + k) / (cg.len() as f64 + k)
            };
            prod *= p;
        }
        let bp = if c.len() > r.len() {
            1.0
        } else {
            (1.0 - r.len() as f64 / c.len() as f64).exp()
        };
        bp * prod.powf(1.0 / max_n as f64)
    }

    #[test]
    fn bleu_self_match_is_one() {
        for s in ["P", "∀ x ( P ( x ) )", "a b c d e f g"] {
            let t = toks(s);
            assert_eq!(bleu(&t, &t, &cfg()).unwrap(), 1.0, "{s}");
        }
    }

    #[test]
    fn bleu_disjoint_is_small_but_positive() {
        let b = bleu(&toks("a b c"), &toks("d e f"), &cfg()).unwrap();
        assert!(b > 0.0);
        // floor: unigram floor with every higher order at its smoothed minimum
        let floor = ((BLEU_UNIGRAM_FLOOR / 3.0) * (1.0 / 3.0) * (1.0 / 2.0) * 1.0f64).powf(0.25);
        assert!((b - floor).abs() < 1e-12, "{b} vs {floor}");
    }

    #[test]
    fn bleu_quantifier_swap_matches_hand_count() {
        let r = metric_tokens("∀x (W(x, C) → A(x, C))", false);
        let c = metric_tokens("∃x (W(x, C) → A(x, C))", false);
        assert_eq!(r.len(), 17);
        let got = bleu(&r, &c, &cfg()).unwrap();
        // p1 = 16/17, p2 = 16/17, p3 = 15/16, p4 = 14/15
        let hand = (224.0f64 / 289.0).powf(0.25);
        assert!((got - hand).abs() < 1e-12);
        assert!((got - bleu_oracle(&r, &c, 4, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn bleu_matches_oracle_with_brevity_penalty() {
        let r = toks("∀ x ( P ( x ) → Q ( x ) ∧ R ( x ) )");
        let c = toks("∀ x ( P ( x ) → Q ( x ) )");
        let got = bleu(&r, &c, &cfg()).unwrap();
        assert!((got - bleu_oracle(&r, &c, 4, 1.0)).abs() < 1e-12);
        assert!(got < 1.0);
    }

    #[test]
    fn rouge_cases() {
        let t = toks("a b c d");
        assert_eq!(rouge(&t, &t, &cfg()).unwrap(), 1.0);
        // reversal of distinct tokens: LCS 1
        let rev: Vec<String> = t.iter().rev().cloned().collect();
        assert!((rouge(&t, &rev, &cfg()).unwrap() - 0.25).abs() < 1e-12);
        let r = metric_tokens("∀x (W(x, C) → A(x, C))", false);
        let c = metric_tokens("∃x (W(x, C) → A(x, C))", false);
        assert_eq!(lcs_len(&r, &c), 16);
        assert!((rouge(&r, &c, &cfg()).unwrap() - 16.0 / 17.0).abs() < 1e-12);
    }

    #[test]
    fn empty_sequences_are_errors() {
        let e: Vec<String> = vec![];
        let t = toks("a");
        assert_eq!(bleu(&e, &t, &cfg()), Err(TextMetricError::EmptySequence));
        assert_eq!(rouge(&t, &e, &cfg()), Err(TextMetricError::EmptySequence));
        assert_eq!(meteor(&e, &e, &cfg()), Err(TextMetricError::EmptySequence));
    }

    #[test]
    fn config_validation() {
        let bad = TextMetricConfig {
            meteor_alpha: 1.0,
            ..cfg()
        };
        assert!(matches!(bad.validate(), Err(TextMetricError::InvalidConfig(_))));
        let bad = TextMetricConfig { bleu_max_n: 0, ..cfg() };
        assert!(bleu(&toks("a"), &toks("a"), &bad).is_err());
    }

    #[test]
    fn meteor_self_match_closed_form() {
        for n in [1usize, 4, 13] {
            let t: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
            let expected = 1.0 - 0.5 * (1.0 / n as f64).powi(3);
            let got = meteor(&t, &t, &cfg()).unwrap();
            assert!((got - expected).abs() < 1e-12);
            assert!((meteor_self_match(n, &cfg()) - expected).abs() < 1e-12);
        }
        assert_eq!(meteor(&toks("a b"), &toks("c d"), &cfg()).unwrap(), 0.0);
    }

    /// Exhaustive oracle: every maximal-match alignment, minimum chunks.
    fn chunks_oracle(r: &[String], c: &[String]) -> (usize, usize) {
        fn rec(
            i: usize,
            r: &[String],
            c: &[String],
            used: &mut Vec<bool>,
            align: &mut Vec<Option<usize>>,
            out: &mut Vec<(usize, usize)>,
        ) {
            if i == c.len() {
                let m = align.iter().flatten().count();
                let mut chunks = 0;
                let mut prev: Option<usize> = None;
                for a in align.iter() {
                    match (prev, a) {
                        (Some(p), Some(j)) if p + 1 == *j => {}
                        (_, Some(_)) => chunks += 1,
                        _ => {}
                    }
                    prev = *a;
                }
                out.push((m, chunks));
                return;
            }
            for j in 0..r.len() {
                if !used[j] && r[j] == c[i] {
                    used[j] = true;
                    align.push(Some(j));
                    rec(i + 1, r, c, used, align, out);
                    align.pop();
                    used[j] = false;
                }
            }
            align.push(None);
            rec(i + 1, r, c, used, align, out);
            align.pop();
        }
        let mut out = Vec::new();
        rec(0, r, c, &mut vec![false; r.len()], &mut Vec::new(), &mut out);
        let best_m = out.iter().map(|x| x.0).max().unwrap();
        let best_c = out.iter().filter(|x| x.0 == best_m).map(|x| x.1).min().unwrap();
        (best_m, best_c)
    }

    #[test]
    fn meteor_negation_toggle_matches_exhaustive_alignment() {
        let r = metric_tokens("¬P(a) → Q(a)", false);
        let c = metric_tokens("P(a) → ¬Q(a)", false);
        assert_eq!(r.len(), 10);
        let (m, ch) = chunks_oracle(&r, &c);
        let a = meteor_alignment(&r, &c);
        assert_eq!((a.matches, a.chunks), (m, ch));
        assert_eq!((m, ch), (10, 3));
        let expected = meteor_from_counts(10, 3, 10, 10, &cfg());
        assert!((meteor(&r, &c, &cfg()).unwrap() - expected).abs() < 1e-12);
        assert!((expected - (1.0 - 0.5 * 0.3f64.powi(3))).abs() < 1e-12);
    }

    #[test]
    fn meteor_alignment_matches_oracle_on_small_sequences() {
        let vocab = ["(", ")", "x", "P", "¬", ","];
        let mut state = 7u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for _ in 0..200 {
            let lr = 1 + next() % 8;
            let lc = 1 + next() % 8;
            let r: Vec<String> = (0..lr).map(|_| vocab[next() % vocab.len()].to_string()).collect();
            let c: Vec<String> = (0..lc).map(|_| vocab[next() % vocab.len()].to_string()).collect();
            let a = meteor_alignment(&r, &c);
            let (m, ch) = chunks_oracle(&r, &c);
            assert_eq!((a.matches, a.chunks), (m, ch), "{r:?} / {c:?}");
        }
    }

    #[test]
    fn scores_are_in_unit_range() {
        let pairs = [("a b c", "c b a"), ("a a a", "a"), ("x", "x y z w"), ("p q", "q p q p")];
        for (r, c) in pairs {
            let (r, c) = (toks(r), toks(c));
            for v in [
                bleu(&r, &c, &cfg()).unwrap(),
                rouge(&r, &c, &cfg()).unwrap(),
                meteor(&r, &c, &cfg()).unwrap(),
            ] {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
