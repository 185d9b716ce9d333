mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use foleval::harness::{CorpusFormat, Normalization};
use foleval::metrics::Metric;
use foleval::perturb::PerturbationKind;

/// Closeness metrics, perturbations and rank alignment for first-order
/// logic statements.
#[derive(Debug, Parser)]
#[command(name = "foleval", version)]
struct Cli {
    /// Seed for every randomized component.
    #[arg(long, global = true, default_value_t = 17)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write one perturbed corpus per kind plus an applicability table.
    Perturb(PerturbArgs),
    /// Score every sample against its gold statement.
    Score(ScoreArgs),
    /// Turn a score file into per-record rank vectors.
    Rank(RankArgs),
    /// RMSE between two rank files, per pair of rankers.
    Align(AlignArgs),
    /// Operator histogram and perturbation applicability of a corpus.
    Stats(StatsArgs),
    /// Rank three-sample records with a judge model or a recorded judge file.
    Judge(JudgeArgs),
    /// Mean absolute difference between two metrics in a score file.
    Disagree(DisagreeArgs),
}

#[derive(Debug, Args)]
struct PerturbArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = CorpusFormat::Records)]
    format: CorpusFormat,
    /// `all` or a comma-separated list of kinds.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    kinds: Vec<KindArg>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Record file; repeat to get one table row per file.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = CorpusFormat::Records)]
    format: CorpusFormat,
    /// Comma-separated metrics; all six when omitted.
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<Metric>,
    /// Metric pairs to average, such as `le+bs,bl+sp`.
    #[arg(long, value_delimiter = ',')]
    combine: Vec<CombinePair>,
    /// Weight of the first metric in each combined pair.
    #[arg(long, default_value_t = 0.5, value_parser = parse_weight)]
    weights: f64,
    #[arg(long, default_value_t = Normalization::PerRecord)]
    normalization: Normalization,
    #[arg(long, value_enum, default_value_t = ProviderArg::Fallback)]
    provider: ProviderArg,
    /// Base URL of the embedding service.
    #[arg(long, required_if_eq("provider", "remote"))]
    endpoint: Option<String>,
    /// Split CamelCase predicate names before the text metrics.
    #[arg(long)]
    split_camel_case: bool,
    /// Worker threads; all available cores when omitted.
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    workers: Option<u16>,
    /// Score file to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write the means table as `<PREFIX>.txt` and `<PREFIX>.jsonl`.
    #[arg(long, value_name = "PREFIX")]
    table: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RankArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AlignArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Report file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = CorpusFormat::Records)]
    format: CorpusFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["offline", "endpoint"])))]
struct JudgeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Recorded rankings, one `{"record_id", "ranks"}` object per line.
    #[arg(long)]
    offline: Option<PathBuf>,
    /// Chat-completion endpoint URL.
    #[arg(long, requires = "model")]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Also write every raw judge reply.
    #[arg(long)]
    replies: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DisagreeArgs {
    #[arg(long)]
    scores: PathBuf,
    /// Metric id, such as `BL` or `BS-LE`.
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProviderArg {
    Fallback,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KindArg {
    All,
    One(PerturbationKind),
}

impl FromStr for KindArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(KindArg::All);
        }
        s.parse().map(KindArg::One).map_err(|e| {
            let ids: Vec<&str> = PerturbationKind::ALL.iter().map(|k| k.id()).collect();
            format!("{e} (expected all or one of {})", ids.join(", "))
        })
    }
}

fn expand_kinds(args: &[KindArg]) -> Vec<PerturbationKind> {
    let mut out: Vec<PerturbationKind> = Vec::new();
    for a in args {
        match a {
            KindArg::All => out.extend(PerturbationKind::ALL),
            KindArg::One(k) => out.push(*k),
        }
    }
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct CombinePair(Metric, Metric);

impl FromStr for CombinePair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once('+')
            .ok_or_else(|| format!("expected two metrics joined by '+', got {s:?}"))?;
        let a: Metric = a.parse().map_err(|e| format!("{e}"))?;
        let b: Metric = b.parse().map_err(|e| format!("{e}"))?;
        if a == b {
            return Err(format!("cannot combine {a} with itself"));
        }
        Ok(CombinePair(a, b))
    }
}

fn parse_weight(s: &str) -> Result<f64, String> {
    let w: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&w) {
        Ok(w)
    } else {
        Err(format!("weight must lie in [0, 1], got {w}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Score(a) = &cli.command {
        let missing = a
            .combine
            .iter()
            .flat_map(|p| [p.0, p.1])
            .find(|m| !a.metrics.is_empty() && !a.metrics.contains(m));
        if let Some(m) = missing {
            Cli::command()
                .error(
                    ErrorKind::ArgumentConflict,
                    format!("--combine uses {m}, which --metrics leaves out"),
                )
                .exit();
        }
    }
    let seed = cli.seed;
    let result = match cli.command {
        Command::Perturb(a) => commands::perturb(a, seed),
        Command::Score(a) => commands::score(a, seed),
        Command::Rank(a) => commands::rank(a, seed),
        Command::Align(a) => commands::align(a, seed),
        Command::Stats(a) => commands::stats(a, seed),
        Command::Judge(a) => commands::judge(a, seed),
        Command::Disagree(a) => commands::disagree(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
