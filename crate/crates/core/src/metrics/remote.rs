//! HTTP client for an embedding service speaking the `/health` + `/embed`
//! JSON protocol.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::semantic::{EmbedError, EmbeddingProvider, ProviderKind, TokenEmbeddings};

pub const DEFAULT_BATCH_SIZE: usize = 32;
pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub model: String,
    pub dim: usize,
}

#[derive(Debug, Serialize)]
struct EmbedRequest<'a> {
    sentences: &'a [Vec<String>],
    model: &'a str,
}

#[derive(Debug, Deserialize)]
struct EmbedResponse {
    dim: usize,
    vectors: Vec<Vec<Vec<f64>>>,
}

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
struct Permits {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Permits);

impl Permits {
    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

#[derive(Debug)]
pub struct RemoteEmbedder {
    endpoint: String,
    model: String,
    dim: usize,
    batch_size: usize,
    agent: ureq::Agent,
    permits: Permits,
}

fn unavailable(e: ureq::Error) -> EmbedError {
    EmbedError::ProviderUnavailable(e.to_string())
}

impl RemoteEmbedder {
    /// Probes `GET /health` and fixes the model and dimension it reports.
    pub fn connect(endpoint: &str) -> Result<Self, EmbedError> {
        Self::connect_with(
            endpoint,
            DEFAULT_BATCH_SIZE,
            DEFAULT_MAX_IN_FLIGHT,
            Duration::from_secs(60),
        )
    }

    pub fn connect_with(
        endpoint: &str,
        batch_size: usize,
        max_in_flight: usize,
        timeout: Duration,
    ) -> Result<Self, EmbedError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        let endpoint = endpoint.trim_end_matches('/').to_string();
        let health: Health = agent
            .get(format!("{endpoint}/health"))
            .call()
            .map_err(unavailable)?
            .body_mut()
            .read_json()
            .map_err(|e| EmbedError::Protocol(format!("bad /health body: {e}")))?;
        if health.status != "ok" {
            return Err(EmbedError::ProviderUnavailable(format!(
                "health status {:?}",
                health.status
            )));
        }
        if health.dim == 0 {
            return Err(EmbedError::Protocol("health reports dim 0".into()));
        }
        Ok(RemoteEmbedder {
            endpoint,
            model: health.model,
            dim: health.dim,
            batch_size: batch_size.max(1),
            agent,
            permits: Permits {
                free: Mutex::new(max_in_flight.max(1)),
                cv: Condvar::new(),
            },
        })
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn post_chunk(&self, chunk: &[Vec<String>]) -> Result<Vec<TokenEmbeddings>, EmbedError> {
        let resp: EmbedResponse = {
            let _permit = self.permits.acquire();
            self.agent
                .post(format!("{}/embed", self.endpoint))
                .send_json(EmbedRequest {
                    sentences: chunk,
                    model: &self.model,
                })
                .map_err(unavailable)?
                .body_mut()
                .read_json()
                .map_err(|e| EmbedError::Protocol(format!("bad /embed body: {e}")))?
        };
        if resp.dim != self.dim {
            return Err(EmbedError::DimensionMismatch {
                expected: self.dim,
                found: resp.dim,
            });
        }
        if resp.vectors.len() != chunk.len() {
            return Err(EmbedError::Protocol(format!(
                "sent {} sentences, received {}",
                chunk.len(),
                resp.vectors.len()
            )));
        }
        chunk
            .iter()
            .zip(resp.vectors)
            .map(|(tokens, vectors)| {
                if let Some(v) = vectors.iter().find(|v| v.len() != self.dim) {
                    return Err(EmbedError::DimensionMismatch {
                        expected: self.dim,
                        found: v.len(),
                    });
                }
                TokenEmbeddings::new(tokens.clone(), vectors)
            })
            .collect()
    }
}

impl EmbeddingProvider for RemoteEmbedder {
    fn kind(&self) -> ProviderKind {
        ProviderKind::Remote
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn model(&self) -> String {
        self.model.clone()
    }

    fn embed_batch(&self, sentences: &[Vec<String>]) -> Result<Vec<TokenEmbeddings>, EmbedError> {
        if sentences.iter().any(Vec::is_empty) {
            return Err(EmbedError::EmptyTokens);
        }
        let mut out = Vec::with_capacity(sentences.len());
        for chunk in sentences.chunks(self.batch_size) {
            out.extend(self.post_chunk(chunk)?);
        }
        Ok(out)
    }
}
