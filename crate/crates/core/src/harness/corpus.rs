use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A gold formula with candidate samples. `samples` holds no exact duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    #[serde(default)]
    pub nl: String,
    pub gold: String,
    #[serde(default)]
    pub samples: Vec<String>,
}

impl Record {
    pub fn gold_only(id: impl Into<String>, gold: impl Into<String>) -> Self {
        Record {
            id: id.into(),
            nl: String::new(),
            gold: gold.into(),
            samples: Vec::new(),
        }
    }

    /// Drops repeated samples, keeping first occurrences.
    pub fn dedup_samples(&mut self) {
        let mut seen = std::collections::HashSet::new();
        self.samples.retain(|s| seen.insert(s.clone()));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    #[default]
    Records,
    FlatFol,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "records" => Ok(CorpusFormat::Records),
            "flat-fol" => Ok(CorpusFormat::FlatFol),
            other => Err(format!(
                "unknown corpus format {other:?} (expected records or flat-fol)"
            )),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Records => "records",
            CorpusFormat::FlatFol => "flat-fol",
        })
    }
}

/// A line that failed to match the schema. Lines are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[error("line {line}: {message}")]
pub struct SchemaError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub records: Vec<Record>,
    pub errors: Vec<SchemaError>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Deserialize)]
struct FlatLine {
    id: String,
    gold: String,
}

fn parse_line(line: &str, format: CorpusFormat) -> Result<Record, String> {
    let mut rec = match format {
        CorpusFormat::Records => serde_json::from_str::<Record>(line).map_err(|e| e.to_string())?,
        CorpusFormat::FlatFol => {
            let f: FlatLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
            Record::gold_only(f.id, f.gold)
        }
    };
    if rec.gold.trim().is_empty() {
        return Err("gold is empty".into());
    }
    rec.dedup_samples();
    Ok(rec)
}

/// Parses one JSON object per line; blank lines are skipped and malformed
/// lines are reported, never dropped silently.
pub fn parse_corpus(text: &str, format: CorpusFormat) -> Corpus {
    let mut corpus = Corpus::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line, format) {
            Ok(r) => corpus.records.push(r),
            Err(message) => corpus.errors.push(SchemaError { line: i + 1, message }),
        }
    }
    corpus
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| {
        if source.kind() == io::ErrorKind::NotFound {
            CorpusError::FileNotFound(path.to_path_buf())
        } else {
            CorpusError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    Ok(parse_corpus(&text, format))
}
