//! Chat-completions over HTTPS.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{BackendKind, ChatBackend, ChatRequest, ChatResponse, FinishReason, GatewayError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LiveConfig {
    pub endpoint: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_s: u64,
}

impl Default for LiveConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_s: 120,
        }
    }
}

pub struct LiveBackend {
    config: LiveConfig,
    key: String,
    client: reqwest::blocking::Client,
}

impl LiveBackend {
    /// Reads the key from the environment; it is never written anywhere.
    pub fn from_env(config: LiveConfig) -> Result<Self, GatewayError> {
        let key = std::env::var(&config.api_key_env)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| GatewayError::MissingKey(config.api_key_env.clone()))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_s))
            .build()
            .map_err(|e| GatewayError::Rejected(e.to_string()))?;
        Ok(Self { config, key, client })
    }
}

pub fn request_body(req: &ChatRequest) -> serde_json::Value {
    json!({
        "model": req.model_id,
        "messages": [
            {"role": "system", "content": req.system_text},
            {"role": "user", "content": req.user_text},
        ],
        "temperature": req.temperature,
        "max_tokens": req.max_output_tokens,
    })
}

/// First choice of a chat-completions response body.
pub fn parse_response_body(body: &serde_json::Value, latency_ms: u64) -> Result<ChatResponse, GatewayError> {
    let choice = body
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| GatewayError::Rejected("response has no choices".into()))?;
    let text = choice
        .pointer("/message/content")
        .and_then(|c| c.as_str())
        .unwrap_or("")
        .to_string();
    let finish_reason = match choice.get("finish_reason").and_then(|f| f.as_str()) {
        Some("stop") => FinishReason::Stop,
        Some("length") => FinishReason::Length,
        _ => FinishReason::Error,
    };
    Ok(ChatResponse {
        text,
        finish_reason,
        latency_ms,
        backend: BackendKind::Live,
    })
}

impl ChatBackend for LiveBackend {
    fn send(&self, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let start = Instant::now();
        let resp = self
            .client
            .post(&self.config.endpoint)
            .bearer_auth(&self.key)
            .json(&request_body(req))
            .send()
            .map_err(|e| GatewayError::Transient(e.to_string()))?;
        let status = resp.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(GatewayError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            let body = resp.text().unwrap_or_default();
            return Err(GatewayError::Rejected(format!(
                "HTTP {status}: {}",
                body.chars().take(300).collect::<String>()
            )));
        }
        let body: serde_json::Value = resp.json().map_err(|e| GatewayError::Transient(e.to_string()))?;
        parse_response_body(&body, start.elapsed().as_millis() as u64)
    }
}
