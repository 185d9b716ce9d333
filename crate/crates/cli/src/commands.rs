use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use foleval::harness::judge::{judge_rank, HttpJudge, JudgeClient, OfflineJudge, JUDGE_KEY_ENV};
use foleval::harness::report::{applicability_table, mean_by_metric, means_table, rmse_table, TextTable};
use foleval::harness::stats::HISTOGRAM_BUCKETS;
use foleval::harness::{
    combine_scores, corpus_stats, disagreement, rank_scores, rmse_alignment, score_corpus, scoring::sort_scores,
    AlignmentReport, CorpusFormat, RankVector, Record, ScoreRecord, ScoringConfig,
};
use foleval::metrics::remote::RemoteEmbedder;
use foleval::metrics::semantic::{EmbeddingProvider, HashedTrigramEmbedder, ProviderKind};
use foleval::metrics::Metric;
use foleval::perturb::{applicability_report, Applicability, PerturbationKind};
use foleval::syntax::{parse_str, print, Formula, Notation};
use serde::Serialize;

use crate::io::{header_path, jsonl, load_records, read_jsonl, write, write_json, write_jsonl};
use crate::{
    expand_kinds, AlignArgs, DisagreeArgs, JudgeArgs, PerturbArgs, ProviderArg, RankArgs, ScoreArgs, StatsArgs,
};

/// Fully resolved settings of one run. Holds no timestamps or host details
/// so identical invocations write identical headers.
#[derive(Debug, Default, Serialize)]
struct RunConfig {
    tool: String,
    subcommand: &'static str,
    seed: u64,
    inputs: Vec<String>,
    outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    format: Option<CorpusFormat>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    kinds: Vec<PerturbationKind>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    metrics: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    combine: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    combine_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scoring: Option<ScoringConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    provider: Option<ProviderInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    judge: Option<JudgeInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pooling: Option<String>,
}

#[derive(Debug, Serialize)]
struct ProviderInfo {
    kind: ProviderKind,
    model: String,
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    endpoint: Option<String>,
}

#[derive(Debug, Serialize)]
struct JudgeInfo {
    mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    offline: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    endpoint: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<String>,
    /// Whether the credential variable was set; its value is never recorded.
    #[serde(skip_serializing_if = "Option::is_none")]
    key_set: Option<bool>,
}

impl RunConfig {
    fn new(subcommand: &'static str, seed: u64) -> Self {
        RunConfig {
            tool: format!("foleval {}", env!("CARGO_PKG_VERSION")),
            subcommand,
            seed,
            ..RunConfig::default()
        }
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

/// Writes `<prefix>.txt` and `<prefix>.jsonl`.
fn write_table<T: Serialize>(prefix: &Path, table: &TextTable, rows: &[T]) -> Result<Vec<String>> {
    let txt = prefix.with_extension("txt");
    let lines = prefix.with_extension("jsonl");
    write(&txt, &table.to_string())?;
    write_jsonl(&lines, rows)?;
    Ok(vec![display(&txt), display(&lines)])
}

#[derive(Serialize)]
struct PerturbedRecord<'a> {
    #[serde(flatten)]
    record: Record,
    kind: PerturbationKind,
    applied: bool,
    sites: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    parse_error: Option<&'a str>,
}

pub fn perturb(args: PerturbArgs, seed: u64) -> Result<()> {
    let records = load_records(&args.input, args.format)?;
    let kinds = expand_kinds(&args.kinds);
    let parsed: Vec<Result<Formula, String>> = records
        .iter()
        .map(|r| parse_str(&r.gold).map_err(|e| e.to_string()))
        .collect();
    let mut cfg = RunConfig::new("perturb", seed);
    cfg.inputs = vec![display(&args.input)];
    cfg.format = Some(args.format);
    cfg.kinds = kinds.clone();

    for &kind in &kinds {
        let lines: Vec<PerturbedRecord> = records
            .iter()
            .zip(&parsed)
            .map(|(r, f)| {
                let outcome = f.as_ref().ok().map(|f| kind.apply(f));
                let result = outcome.as_ref().and_then(|o| o.result.as_ref());
                PerturbedRecord {
                    record: Record {
                        samples: result.map(|g| vec![print(g, Notation::Unicode)]).unwrap_or_default(),
                        ..r.clone()
                    },
                    kind,
                    applied: result.is_some(),
                    sites: outcome.map_or(0, |o| o.sites),
                    parse_error: f.as_ref().err().map(String::as_str),
                }
            })
            .collect();
        let path = args.out.join(format!("{kind}.jsonl"));
        write_jsonl(&path, &lines)?;
        cfg.outputs.push(display(&path));
    }

    let formulas: Vec<Formula> = parsed.iter().filter_map(|f| f.as_ref().ok().cloned()).collect();
    let failures = records.len() - formulas.len();
    if formulas.is_empty() {
        bail!("{}: no gold formula parses", args.input.display());
    }
    let rows: Vec<Applicability> = applicability_report(&formulas)?
        .into_values()
        .filter(|a| kinds.contains(&a.kind))
        .collect();
    let table = applicability_table(&rows);
    cfg.outputs
        .extend(write_table(&args.out.join("applicability"), &table, &rows)?);
    write_json(&args.out.join("header.json"), &cfg)?;

    print!("{table}");
    if failures > 0 {
        eprintln!(
            "{failures} of {} gold formulas did not parse and were left unperturbed",
            records.len()
        );
    }
    Ok(())
}

fn file_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| display(path))
}

#[derive(Serialize)]
struct MeansRow<'a> {
    row: &'a str,
    means: &'a BTreeMap<String, f64>,
}

pub fn score(args: ScoreArgs, seed: u64) -> Result<()> {
    let mut metrics = if args.metrics.is_empty() {
        Metric::ALL.to_vec()
    } else {
        args.metrics.clone()
    };
    metrics.sort_by_key(|m| m.abbrev());
    metrics.dedup();

    let mut scoring = ScoringConfig::with_seed(seed);
    scoring.normalization = args.normalization;
    scoring.text.split_camel_case = args.split_camel_case;
    scoring.workers = args.workers.map(usize::from);

    let fallback = HashedTrigramEmbedder::default();
    let remote;
    let provider: &dyn EmbeddingProvider = match args.provider {
        ProviderArg::Remote if metrics.contains(&Metric::BertScore) => {
            let endpoint = args.endpoint.as_deref().context("--endpoint is required")?;
            remote = RemoteEmbedder::connect(endpoint)?;
            &remote
        }
        _ => &fallback,
    };

    // Ids are prefixed with the file label when several files share one run.
    let prefix_ids = args.inputs.len() > 1;
    let mut all = Vec::new();
    let mut rows = Vec::new();
    for input in &args.inputs {
        let label = file_label(input);
        let mut records = load_records(input, args.format)?;
        if prefix_ids {
            for r in &mut records {
                r.id = format!("{label}/{}", r.id);
            }
        }
        let mut scores = score_corpus(&records, &metrics, &scoring, provider)
            .with_context(|| format!("scoring {}", input.display()))?;
        let mut combined = Vec::new();
        for pair in &args.combine {
            combined.extend(combine_scores(&scores, pair.0.abbrev(), pair.1.abbrev(), args.weights)?);
        }
        scores.extend(combined);
        rows.push((label, mean_by_metric(&scores)));
        all.extend(scores);
    }
    sort_scores(&mut all);
    write_jsonl(&args.out, &all)?;

    let table = means_table("Corpus", &rows, None);
    let mut cfg = RunConfig::new("score", seed);
    cfg.inputs = args.inputs.iter().map(|p| display(p)).collect();
    cfg.outputs = vec![display(&args.out)];
    cfg.format = Some(args.format);
    cfg.metrics = metrics.iter().map(|m| m.abbrev().to_string()).collect();
    cfg.combine = args
        .combine
        .iter()
        .map(|p| foleval::harness::combined_id(p.0.abbrev(), p.1.abbrev()))
        .collect();
    cfg.combine_weight = (!args.combine.is_empty()).then_some(args.weights);
    cfg.provider = metrics.contains(&Metric::BertScore).then(|| ProviderInfo {
        kind: provider.kind(),
        model: provider.model(),
        dim: provider.dim(),
        endpoint: (provider.kind() == ProviderKind::Remote)
            .then(|| args.endpoint.clone())
            .flatten(),
    });
    cfg.scoring = Some(scoring);
    if let Some(prefix) = &args.table {
        let lines: Vec<MeansRow> = rows.iter().map(|(row, means)| MeansRow { row, means }).collect();
        cfg.outputs.extend(write_table(prefix, &table, &lines)?);
    }
    write_json(&header_path(&args.out), &cfg)?;
    print!("{table}");
    Ok(())
}

pub fn rank(args: RankArgs, seed: u64) -> Result<()> {
    let scores: Vec<ScoreRecord> = read_jsonl(&args.scores)?;
    let ranks = rank_scores(&scores);
    write_jsonl(&args.out, &ranks)?;
    let mut cfg = RunConfig::new("rank", seed);
    cfg.inputs = vec![display(&args.scores)];
    cfg.outputs = vec![display(&args.out)];
    write_json(&header_path(&args.out), &cfg)?;
    println!("{} rank vectors written to {}", ranks.len(), args.out.display());
    Ok(())
}

fn by_ranker(ranks: Vec<RankVector>) -> BTreeMap<String, Vec<RankVector>> {
    let mut out: BTreeMap<String, Vec<RankVector>> = BTreeMap::new();
    for r in ranks {
        out.entry(r.ranker.clone()).or_default().push(r);
    }
    out
}

pub fn align(args: AlignArgs, seed: u64) -> Result<()> {
    let a = by_ranker(read_jsonl(&args.a)?);
    let b = by_ranker(read_jsonl(&args.b)?);
    if a.is_empty() || b.is_empty() {
        bail!("both rank files need at least one rank vector");
    }
    let mut reports: Vec<AlignmentReport> = Vec::new();
    for (na, ra) in &a {
        for (nb, rb) in &b {
            reports.push(rmse_alignment(ra, rb).with_context(|| format!("aligning {na} with {nb}"))?);
        }
    }
    let body = if let [single] = reports.as_slice() {
        format!("{}\n", serde_json::to_string(single)?)
    } else {
        jsonl(&reports)?
    };
    match &args.out {
        Some(out) => {
            write(out, &body)?;
            let mut cfg = RunConfig::new("align", seed);
            cfg.inputs = vec![display(&args.a), display(&args.b)];
            cfg.outputs = vec![display(out)];
            cfg.pooling = Some(reports[0].pooling.clone());
            write_json(&header_path(out), &cfg)?;
            print!("{}", rmse_table(&reports));
        }
        None => print!("{body}"),
    }
    Ok(())
}

pub fn stats(args: StatsArgs, seed: u64) -> Result<()> {
    let records = load_records(&args.input, args.format)?;
    let stats = corpus_stats(&records)?;
    let mut hist = TextTable::new(["Operators", "Records"]);
    for b in HISTOGRAM_BUCKETS {
        hist.push([b.to_string(), stats.histogram.get(b).copied().unwrap_or(0).to_string()]);
    }
    let mut ops = TextTable::new(["Operator", "Count"]);
    for (op, n) in &stats.operators {
        ops.push([op.clone(), n.to_string()]);
    }
    println!("{} records, {} unparsed", stats.records, stats.parse_failures);
    if let Some(mode) = stats.mode() {
        println!("most common operator count: {mode}");
    }
    print!("\n{hist}\n{ops}");
    if !stats.applicability.is_empty() {
        print!("\n{}", applicability_table(&stats.applicability));
    }
    if let Some(out) = &args.out {
        write_json(out, &stats)?;
        let mut cfg = RunConfig::new("stats", seed);
        cfg.inputs = vec![display(&args.input)];
        cfg.outputs = vec![display(out)];
        cfg.format = Some(args.format);
        write_json(&header_path(out), &cfg)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ReplyLine<'a> {
    record_id: &'a str,
    replies: &'a [String],
}

pub fn judge(args: JudgeArgs, seed: u64) -> Result<()> {
    let mut records = load_records(&args.input, CorpusFormat::Records)?;
    records.sort_by(|a, b| a.id.cmp(&b.id));
    let mut cfg = RunConfig::new("judge", seed);
    cfg.inputs = vec![display(&args.input)];
    cfg.outputs = vec![display(&args.out)];

    let mut ranks = Vec::with_capacity(records.len());
    let mut replies = Vec::new();
    if let Some(path) = &args.offline {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let offline = OfflineJudge::from_jsonl(&text)?;
        ranks.extend(records.iter().map(|r| offline.ranks_for(&r.id)));
        cfg.inputs.push(display(path));
        cfg.judge = Some(JudgeInfo {
            mode: "offline",
            offline: Some(display(path)),
            endpoint: None,
            model: None,
            key_set: None,
        });
    } else {
        let endpoint = args.endpoint.as_deref().context("--endpoint is required")?;
        let model = args.model.as_deref().context("--model is required")?;
        let client = HttpJudge::new(endpoint, model);
        let client: &dyn JudgeClient = &client;
        for r in &records {
            let outcome = judge_rank(r, client)?;
            replies.push((r.id.clone(), outcome.replies));
            ranks.push(outcome.ranks);
        }
        cfg.judge = Some(JudgeInfo {
            mode: "http",
            offline: None,
            endpoint: Some(endpoint.to_string()),
            model: Some(model.to_string()),
            key_set: Some(std::env::var_os(JUDGE_KEY_ENV).is_some_and(|k| !k.is_empty())),
        });
    }
    write_jsonl(&args.out, &ranks)?;
    if let Some(path) = &args.replies {
        let lines: Vec<ReplyLine> = replies
            .iter()
            .map(|(id, r)| ReplyLine {
                record_id: id,
                replies: r,
            })
            .collect();
        write_jsonl(path, &lines)?;
        cfg.outputs.push(display(path));
    }
    write_json(&header_path(&args.out), &cfg)?;
    let missing = ranks.iter().filter(|r| r.is_missing()).count();
    println!("{} records ranked, {missing} without a ranking", ranks.len() - missing);
    Ok(())
}

pub fn disagree(args: DisagreeArgs) -> Result<()> {
    let scores: Vec<ScoreRecord> = read_jsonl(&args.scores)?;
    let index: BTreeMap<(&str, usize), f64> = scores
        .iter()
        .filter(|s| s.metric == args.b)
        .map(|s| ((s.record_id.as_str(), s.sample_index), s.normalized))
        .collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in scores.iter().filter(|s| s.metric == args.a) {
        let y = index.get(&(s.record_id.as_str(), s.sample_index)).with_context(|| {
            format!(
                "{} has no {} score for {}#{}",
                args.scores.display(),
                args.b,
                s.record_id,
                s.sample_index
            )
        })?;
        xs.push(s.normalized);
        ys.push(*y);
    }
    if xs.len() != index.len() {
        bail!("{} and {} cover different samples", args.a, args.b);
    }
    let d = disagreement(&xs, &ys).with_context(|| format!("no {} scores in {}", args.a, args.scores.display()))?;
    println!(
        "{}",
        serde_json::json!({"metric_a": args.a, "metric_b": args.b, "n": xs.len(), "disagreement": d})
    );
    Ok(())
}
