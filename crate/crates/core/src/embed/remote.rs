//! Client for the embedding service protocol.
//!
//! `GET /models` → `{"models": [{"name", "dim", ...}]}`;
//! `POST /embed {"model", "texts"}` → `{"model", "dim", "vectors"}`.
//! Vectors come back unnormalized; normalization happens in [`super::embed_corpus`].

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::EmbeddingProvider;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<usize>,
    /// Anything else the service reports (resolved checkpoint ids and the like).
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Deserialize)]
struct ModelList {
    models: Vec<ModelInfo>,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    #[allow(dead_code)]
    model: Option<String>,
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 4,
            base_delay: Duration::from_millis(200),
        }
    }
}

pub struct RemoteProvider {
    endpoint: String,
    info: ModelInfo,
    agent: ureq::Agent,
    retry: RetryPolicy,
}

enum Attempt<T> {
    Done(T),
    Retry(String),
    Fatal(String),
}

impl RemoteProvider {
    /// Connects to `endpoint` and looks up `model` in `/models`.
    pub fn connect(endpoint: &str, model: &str, retry: RetryPolicy) -> Result<Self> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        let endpoint = endpoint.trim_end_matches('/').to_string();
        let url = format!("{endpoint}/models");
        let list: ModelList = with_retry(retry, 0, || match agent.get(&url).call() {
            Ok(mut resp) => match resp.status().as_u16() {
                200 => match resp.body_mut().read_json::<ModelList>() {
                    Ok(v) => Attempt::Done(v),
                    Err(e) => Attempt::Fatal(format!("invalid /models response: {e}")),
                },
                503 => Attempt::Retry("service loading (503)".into()),
                s if s >= 500 => Attempt::Retry(format!("HTTP {s}")),
                s => Attempt::Fatal(format!("HTTP {s} from /models")),
            },
            Err(e) => Attempt::Retry(e.to_string()),
        })?;
        let info = list
            .models
            .into_iter()
            .find(|m| m.name == model)
            .ok_or_else(|| Error::Provider {
                batch: 0,
                message: format!("model {model:?} not served by {endpoint}"),
                retriable: false,
            })?;
        if info.dim == 0 {
            return Err(Error::Contract(format!("service advertises dim 0 for {model:?}")));
        }
        Ok(RemoteProvider {
            endpoint,
            info,
            agent,
            retry,
        })
    }

    pub fn info(&self) -> &ModelInfo {
        &self.info
    }
}

fn with_retry<T>(policy: RetryPolicy, batch: usize, mut f: impl FnMut() -> Attempt<T>) -> Result<T> {
    let attempts = policy.attempts.max(1);
    let mut last = String::new();
    for attempt in 0..attempts {
        match f() {
            Attempt::Done(v) => return Ok(v),
            Attempt::Fatal(message) => {
                return Err(Error::Provider {
                    batch,
                    message,
                    retriable: false,
                })
            }
            Attempt::Retry(message) => {
                log::warn!("embedding request failed (attempt {}/{attempts}): {message}", attempt + 1);
                last = message;
                if attempt + 1 < attempts {
                    std::thread::sleep(policy.base_delay * 2u32.saturating_pow(attempt));
                }
            }
        }
    }
    Err(Error::Provider {
        batch,
        message: format!("giving up after {attempts} attempts: {last}"),
        retriable: false,
    })
}

impl EmbeddingProvider for RemoteProvider {
    fn name(&self) -> &str {
        &self.info.name
    }

    fn dim(&self) -> usize {
        self.info.dim
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        let url = format!("{}/embed", self.endpoint);
        let body = EmbedRequest {
            model: &self.info.name,
            texts,
        };
        let resp: EmbedResponse = with_retry(self.retry, 0, || match self.agent.post(&url).send_json(&body) {
            Ok(mut resp) => match resp.status().as_u16() {
                200 => match resp.body_mut().read_json::<EmbedResponse>() {
                    Ok(v) => Attempt::Done(v),
                    Err(e) => Attempt::Fatal(format!("invalid /embed response: {e}")),
                },
                503 => Attempt::Retry("model loading (503)".into()),
                s if s >= 500 => Attempt::Retry(format!("HTTP {s}")),
                s => Attempt::Fatal(format!("HTTP {s} from /embed")),
            },
            Err(e) => Attempt::Retry(e.to_string()),
        })?;
        if resp.dim != self.info.dim {
            return Err(Error::Contract(format!(
                "service dimension drifted from {} to {}",
                self.info.dim, resp.dim
            )));
        }
        if resp.vectors.len() != texts.len() {
            return Err(Error::Contract(format!(
                "service returned {} vectors for {} texts",
                resp.vectors.len(),
                texts.len()
            )));
        }
        if let Some(v) = resp.vectors.iter().find(|v| v.len() != self.info.dim) {
            return Err(Error::Contract(format!(
                "service returned a {}-dim vector, advertised {}",
                v.len(),
                self.info.dim
            )));
        }
        Ok(resp.vectors)
    }
}
