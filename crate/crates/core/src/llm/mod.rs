//! Chat-completion gateway with live, record and replay backends.
//!
//! Every request carries a digest over its content fields. The record
//! backend stores each exchange under that digest and the replay backend
//! serves it back without touching the network, which makes whole pipeline
//! runs reproducible offline.

pub mod extract;
pub mod live;
pub mod store;

use std::time::Duration;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::sha256_hex;

pub use extract::extract_test_source;
pub use live::{LiveBackend, LiveConfig};
pub use store::TranscriptStore;

pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 4096;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("no stored transcript for request digest {0}")]
    ReplayMiss(String),
    #[error("API key environment variable `{0}` is not set")]
    MissingKey(String),
    #[error("transient failure: {0}")]
    Transient(String),
    #[error("request rejected: {0}")]
    Rejected(String),
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("transcript store: {0}")]
    Store(String),
    #[error("response contains no text")]
    EmptyResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ChatRequest {
    pub model_id: String,
    pub system_text: String,
    pub user_text: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub request_digest: String,
}

#[derive(Serialize)]
struct DigestFields<'a> {
    model_id: &'a str,
    system_text: &'a str,
    user_text: &'a str,
    temperature: f64,
    max_output_tokens: u32,
}

impl ChatRequest {
    pub fn new(model_id: &str, system_text: &str, user_text: &str, temperature: f64, max_output_tokens: u32) -> Self {
        let mut r = Self {
            model_id: model_id.to_string(),
            system_text: system_text.to_string(),
            user_text: user_text.to_string(),
            temperature,
            max_output_tokens,
            request_digest: String::new(),
        };
        r.request_digest = r.compute_digest();
        r
    }

    /// SHA-256 over the JSON encoding of the content fields (fixed field
    /// order, so the value is stable across processes).
    pub fn compute_digest(&self) -> String {
        let fields = DigestFields {
            model_id: &self.model_id,
            system_text: &self.system_text,
            user_text: &self.user_text,
            temperature: self.temperature,
            max_output_tokens: self.max_output_tokens,
        };
        sha256_hex(serde_json::to_string(&fields).unwrap_or_default().as_bytes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    Stop,
    Length,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Live,
    Replay,
    Scripted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct ChatResponse {
    pub text: String,
    pub finish_reason: FinishReason,
    pub latency_ms: u64,
    pub backend: BackendKind,
}

/// Anything able to answer a chat request once.
pub trait ChatBackend: Send + Sync {
    fn send(&self, req: &ChatRequest) -> Result<ChatResponse, GatewayError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 5,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(30),
        }
    }
}

impl RetryPolicy {
    pub fn delay(&self, attempt: u32) -> Duration {
        let factor = 1u32.checked_shl(attempt).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

/// Call `backend`, retrying transient failures with exponential backoff.
pub fn send_with_retry(
    backend: &dyn ChatBackend,
    req: &ChatRequest,
    policy: RetryPolicy,
) -> Result<ChatResponse, GatewayError> {
    let mut last = String::new();
    for attempt in 0..policy.max_attempts.max(1) {
        match backend.send(req) {
            Err(GatewayError::Transient(msg)) => {
                log::warn!(
                    "request {} attempt {} failed: {msg}",
                    &req.request_digest[..12.min(req.request_digest.len())],
                    attempt + 1
                );
                last = msg;
                if attempt + 1 < policy.max_attempts {
                    std::thread::sleep(policy.delay(attempt));
                }
            }
            other => return other,
        }
    }
    Err(GatewayError::RetriesExhausted {
        attempts: policy.max_attempts.max(1),
        last,
    })
}

/// A configured backend.
pub enum Gateway {
    Live {
        backend: Box<dyn ChatBackend>,
        retry: RetryPolicy,
    },
    Record {
        backend: Box<dyn ChatBackend>,
        retry: RetryPolicy,
        store: TranscriptStore,
    },
    Replay {
        store: TranscriptStore,
    },
}

impl Gateway {
    pub fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        match self {
            Gateway::Live { backend, retry } => send_with_retry(backend.as_ref(), req, *retry),
            Gateway::Record { backend, retry, store } => {
                let resp = send_with_retry(backend.as_ref(), req, *retry)?;
                store.save(req, &resp)?;
                Ok(resp)
            }
            Gateway::Replay { store } => {
                let mut resp = store
                    .load(&req.request_digest)?
                    .ok_or_else(|| GatewayError::ReplayMiss(req.request_digest.clone()))?;
                resp.backend = BackendKind::Replay;
                resp.latency_ms = 0;
                Ok(resp)
            }
        }
    }
}
