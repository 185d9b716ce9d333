//! Ranking of three samples by an external judge model, live or replayed.

use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::corpus::Record;
use super::ranking::RankVector;

pub const JUDGE_RANKER: &str = "judge";

/// Instruction preamble of the judge prompt. The label and samples follow.
pub const JUDGE_TEMPLATE: &str = "Given a ground truth first-order logic statement and three variations of samples, your task is to rank the samples in order of similarity with the label. The output should be a single list with 3 integers, including [1, 2, 3], where 1 represents the closest match and 3 is the least match. Do not include any other explanation and the output form is [rank_sample1, rank_sample2, rank_sample3].";

/// Environment variable holding the judge endpoint credential.
pub const JUDGE_KEY_ENV: &str = "FOLEVAL_JUDGE_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JudgeError {
    #[error("record {record_id} has {found} samples; the judge ranks exactly 3")]
    WrongSampleCount { record_id: String, found: usize },
    #[error("judge unreachable: {0}")]
    Unreachable(String),
    #[error("unparseable judge reply: {0:?}")]
    UnparseableReply(String),
    #[error("offline judge file, line {line}: {message}")]
    OfflineFile { line: usize, message: String },
}

pub fn judge_prompt(record: &Record) -> Result<String, JudgeError> {
    if record.samples.len() != 3 {
        return Err(JudgeError::WrongSampleCount {
            record_id: record.id.clone(),
            found: record.samples.len(),
        });
    }
    Ok(format!(
        "{JUDGE_TEMPLATE}\n\nLabel: {}\nSample 1: {}\nSample 2: {}\nSample 3: {}\nOutput:",
        record.gold, record.samples[0], record.samples[1], record.samples[2]
    ))
}

static TRIPLE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\[\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\]").expect("valid pattern"));

/// Extracts the first bracketed integer triple whose entries lie in 1..=3.
pub fn parse_reply(reply: &str) -> Result<[u32; 3], JudgeError> {
    let bad = || JudgeError::UnparseableReply(reply.to_string());
    let caps = TRIPLE.captures(reply).ok_or_else(bad)?;
    let mut out = [0u32; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = caps[k + 1].parse().map_err(|_| bad())?;
        if !(1..=3).contains(slot) {
            return Err(bad());
        }
    }
    Ok(out)
}

/// A model that answers a prompt with text.
pub trait JudgeClient: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, JudgeError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeOutcome {
    /// Empty ranks when both attempts were unparseable.
    pub ranks: RankVector,
    pub replies: Vec<String>,
}

/// Asks the judge, retrying once on an unparseable reply.
pub fn judge_rank(record: &Record, client: &dyn JudgeClient) -> Result<JudgeOutcome, JudgeError> {
    let prompt = judge_prompt(record)?;
    let mut replies = Vec::new();
    for _ in 0..2 {
        let reply = client.complete(&prompt)?;
        let parsed = parse_reply(&reply);
        replies.push(reply);
        if let Ok(r) = parsed {
            return Ok(JudgeOutcome {
                ranks: RankVector {
                    record_id: record.id.clone(),
                    ranker: JUDGE_RANKER.into(),
                    ranks: r.to_vec(),
                },
                replies,
            });
        }
    }
    Ok(JudgeOutcome {
        ranks: RankVector {
            record_id: record.id.clone(),
            ranker: JUDGE_RANKER.into(),
            ranks: Vec::new(),
        },
        replies,
    })
}

#[derive(Debug, Deserialize)]
struct OfflineLine {
    record_id: String,
    ranks: Vec<u32>,
}

/// Pre-recorded rankings keyed by record id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OfflineJudge {
    entries: HashMap<String, Vec<u32>>,
}

impl OfflineJudge {
    /// Parses `{"record_id", "ranks"}` lines; blank lines are skipped.
    pub fn from_jsonl(text: &str) -> Result<Self, JudgeError> {
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let l: OfflineLine = serde_json::from_str(line).map_err(|e| JudgeError::OfflineFile {
                line: i + 1,
                message: e.to_string(),
            })?;
            entries.insert(l.record_id, l.ranks);
        }
        Ok(OfflineJudge { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The recorded entry verbatim, or an empty (missing) rank vector.
    pub fn ranks_for(&self, record_id: &str) -> RankVector {
        RankVector {
            record_id: record_id.to_string(),
            ranker: JUDGE_RANKER.into(),
            ranks: self.entries.get(record_id).cloned().unwrap_or_default(),
        }
    }
}

#[cfg(feature = "http")]
pub use http::HttpJudge;

#[cfg(feature = "http")]
mod http {
    use std::time::Duration;

    use serde::Deserialize;
    use serde_json::json;

    use super::{JudgeClient, JudgeError, JUDGE_KEY_ENV};

    /// Chat-completion style endpoint: the prompt is sent as the single user
    /// message and the first choice's content is the reply.
    #[derive(Debug)]
    pub struct HttpJudge {
        endpoint: String,
        model: String,
        key: Option<String>,
        agent: ureq::Agent,
    }

    #[derive(Deserialize)]
    struct Completion {
        choices: Vec<Choice>,
    }

    #[derive(Deserialize)]
    struct Choice {
        message: Message,
    }

    #[derive(Deserialize)]
    struct Message {
        content: String,
    }

    impl HttpJudge {
        /// Reads the bearer credential from the environment, if set.
        pub fn new(endpoint: &str, model: &str) -> Self {
            let key = std::env::var(JUDGE_KEY_ENV).ok().filter(|k| !k.is_empty());
            Self::with_key(endpoint, model, key)
        }

        pub fn with_key(endpoint: &str, model: &str, key: Option<String>) -> Self {
            let agent: ureq::Agent = ureq::Agent::config_builder()
                .timeout_global(Some(Duration::from_secs(120)))
                .build()
                .into();
            HttpJudge {
                endpoint: endpoint.to_string(),
                model: model.to_string(),
                key,
                agent,
            }
        }
    }

    impl JudgeClient for HttpJudge {
        fn complete(&self, prompt: &str) -> Result<String, JudgeError> {
            let mut req = self.agent.post(&self.endpoint);
            if let Some(k) = &self.key {
                req = req.header("Authorization", format!("Bearer {k}"));
            }
            let body = json!({
                "model": self.model,
                "temperature": 0,
                "messages": [{"role": "user", "content": prompt}],
            });
            let completion: Completion = req
                .send_json(body)
                .map_err(|e| JudgeError::Unreachable(e.to_string()))?
                .body_mut()
                .read_json()
                .map_err(|e| JudgeError::UnparseableReply(format!("malformed completion body: {e}")))?;
            completion
                .choices
                .into_iter()
                .next()
                .map(|c| c.message.content)
                .ok_or_else(|| JudgeError::UnparseableReply("completion has no choices".into()))
        }
    }
}
