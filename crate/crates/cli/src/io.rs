//! File helpers shared by the subcommands. Every writer produces the same
//! bytes for the same values.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use foleval::harness::{load_corpus, CorpusFormat, Record};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Loads a corpus, refusing schema errors and empty files.
pub fn load_records(path: &Path, format: CorpusFormat) -> Result<Vec<Record>> {
    let corpus = load_corpus(path, format)?;
    if let Some(first) = corpus.errors.first() {
        bail!(
            "{}: {} malformed line(s), first at {first}",
            path.display(),
            corpus.errors.len()
        );
    }
    if corpus.records.is_empty() {
        bail!("{}: no records", path.display());
    }
    Ok(corpus.records)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{}: line {}", path.display(), i + 1)))
        .collect()
}

pub fn jsonl<T: Serialize>(items: &[T]) -> Result<String> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    write(path, &jsonl(items)?)
}

/// `<out>.header.json` next to an output file.
pub fn header_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".header.json");
    out.with_file_name(name)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, &text)
}
