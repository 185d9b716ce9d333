//! Prints mean normalized scores per perturbation kind and metric over the
//! bundled fixture corpus.

use std::collections::BTreeMap;

use foleval::harness::report::{mean_by_metric, means_table};
use foleval::harness::{parse_corpus, score_corpus, CorpusFormat, Record, ScoringConfig};
use foleval::metrics::semantic::HashedTrigramEmbedder;
use foleval::metrics::Metric;
use foleval::perturb::PerturbationKind;
use foleval::{parse_str, syntax::print, Notation};

fn main() {
    let corpus = parse_corpus(include_str!("../fixtures/fixture50.jsonl"), CorpusFormat::Records);
    assert!(corpus.errors.is_empty(), "{:?}", corpus.errors);
    let mut rows = Vec::new();
    for kind in PerturbationKind::ALL {
        let records: Vec<Record> = corpus
            .records
            .iter()
            .filter_map(|r| {
                let f = parse_str(&r.gold).expect("fixture parses");
                let out = kind.apply(&f).result?;
                Some(Record {
                    samples: vec![print(&out, Notation::Unicode)],
                    ..r.clone()
                })
            })
            .collect();
        let scores = score_corpus(
            &records,
            &Metric::ALL,
            &ScoringConfig::default(),
            &HashedTrigramEmbedder::default(),
        )
        .expect("scoring succeeds");
        let means: BTreeMap<String, f64> = mean_by_metric(&scores);
        rows.push((format!("{} ({})", kind.id(), records.len()), means));
    }
    print!("{}", means_table("perturbation", &rows, None));
}
