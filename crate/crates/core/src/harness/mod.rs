//! Corpus ingestion, batch scoring, ranking, judge alignment and reports.

pub mod corpus;
pub mod judge;
pub mod ranking;
pub mod report;
pub mod scoring;
pub mod stats;

pub use corpus::{load_corpus, parse_corpus, Corpus, CorpusError, CorpusFormat, Record, SchemaError};
pub use ranking::{disagreement, rank, rank_scores, rmse_alignment, AlignmentReport, RankError, RankVector};
pub use scoring::{
    combine, combine_scores, combined_id, score_corpus, score_pair, self_match_constant, Normalization, ScoreError,
    ScoreRecord, ScoringConfig,
};
pub use stats::{corpus_stats, CorpusStats};

/// Order-preserving map over `items`, on `workers` threads when the
/// `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T, R, F>(items: &[T], workers: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match workers {
        Some(1) => items.iter().map(f).collect(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(_) => items.iter().map(f).collect(),
        },
        None => items.par_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, R, F>(items: &[T], _workers: Option<usize>, f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}
