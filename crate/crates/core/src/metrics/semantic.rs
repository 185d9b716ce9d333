//! Greedy embedding-matching score over per-token vectors.

use std::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedError {
    #[error("cannot embed an empty token sequence")]
    EmptyTokens,
    #[error("embedding provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("embedding protocol violation: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Fallback,
    Remote,
}

/// Source of one vector per token. Implementations must be safe to call
/// from several workers at once.
pub trait EmbeddingProvider: Send + Sync {
    fn kind(&self) -> ProviderKind;

    fn dim(&self) -> usize;

    /// Name recorded in run headers.
    fn model(&self) -> String;

    fn embed_batch(&self, sentences: &[Vec<String>]) -> Result<Vec<TokenEmbeddings>, EmbedError>;

    fn embed(&self, tokens: &[String]) -> Result<TokenEmbeddings, EmbedError> {
        let mut out = self.embed_batch(&[tokens.to_vec()])?;
        out.pop()
            .ok_or_else(|| EmbedError::Protocol("provider returned no sentences".into()))
    }
}

/// Tokens paired with unit-norm vectors of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenEmbeddings {
    tokens: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

impl TokenEmbeddings {
    /// L2-normalizes every vector. Fails on empty input, count or dimension
    /// mismatch and zero vectors.
    pub fn new(tokens: Vec<String>, vectors: Vec<Vec<f64>>) -> Result<Self, EmbedError> {
        if tokens.is_empty() {
            return Err(EmbedError::EmptyTokens);
        }
        if tokens.len() != vectors.len() {
            return Err(EmbedError::Protocol(format!(
                "{} tokens but {} vectors",
                tokens.len(),
                vectors.len()
            )));
        }
        let dim = vectors[0].len();
        if dim == 0 {
            return Err(EmbedError::DimensionMismatch { expected: 1, found: 0 });
        }
        let mut out = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.len() != dim {
                return Err(EmbedError::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(EmbedError::Protocol("zero or non-finite vector".into()));
            }
            out.push(v.into_iter().map(|x| x / norm).collect());
        }
        Ok(TokenEmbeddings { tokens, vectors: out })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Cosine of two unit vectors; exactly 1 for identical vectors.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    if a == b {
        return 1.0;
    }
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0)
}

pub const FALLBACK_DIM: usize = 256;

/// Deterministic embedder: FNV-1a hashed character trigrams of the token
/// padded with `#` on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashedTrigramEmbedder {
    pub dim: usize,
}

impl Default for HashedTrigramEmbedder {
    fn default() -> Self {
        HashedTrigramEmbedder { dim: FALLBACK_DIM }
    }
}

/// Character trigrams of `#token#`.
pub fn padded_trigrams(token: &str) -> Vec<String> {
    let chars: Vec<char> = std::iter::once('#')
        .chain(token.chars())
        .chain(std::iter::once('#'))
        .collect();
    chars.windows(3).map(|w| w.iter().collect()).collect()
}

pub fn trigram_bucket(trigram: &str, dim: usize) -> usize {
    let mut h = FnvHasher::default();
    h.write(trigram.as_bytes());
    (h.finish() % dim as u64) as usize
}

impl HashedTrigramEmbedder {
    pub fn vector(&self, token: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for t in padded_trigrams(token) {
            v[trigram_bucket(&t, self.dim)] += 1.0;
        }
        v
    }
}

impl EmbeddingProvider for HashedTrigramEmbedder {
    fn kind(&self) -> ProviderKind {
        ProviderKind::Fallback
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn model(&self) -> String {
        format!("hashed-trigram-{}", self.dim)
    }

    fn embed_batch(&self, sentences: &[Vec<String>]) -> Result<Vec<TokenEmbeddings>, EmbedError> {
        sentences
            .iter()
            .map(|s| TokenEmbeddings::new(s.clone(), s.iter().map(|t| self.vector(t)).collect()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BertScore {
    pub precision: f64,
    pub recall: f64,
    /// In `[-1, 1]`.
    pub f1: f64,
    /// `max(f1, 0)`.
    pub score: f64,
}

fn greedy_mean(from: &TokenEmbeddings, to: &TokenEmbeddings) -> f64 {
    let sum: f64 = from
        .vectors
        .iter()
        .map(|v| {
            to.vectors
                .iter()
                .map(|w| cosine(v, w))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum();
    sum / from.len() as f64
}

/// Precision is the mean best cosine of each candidate token against the
/// reference, recall the converse.
pub fn bertscore(reference: &TokenEmbeddings, candidate: &TokenEmbeddings) -> Result<BertScore, EmbedError> {
    if reference.dim() != candidate.dim() {
        return Err(EmbedError::DimensionMismatch {
            expected: reference.dim(),
            found: candidate.dim(),
        });
    }
    let precision = greedy_mean(candidate, reference);
    let recall = greedy_mean(reference, candidate);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(BertScore {
        precision,
        recall,
        f1,
        score: f1.clamp(0.0, 1.0),
    })
}
