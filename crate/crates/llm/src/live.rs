//! HTTP backend for an OpenAI-style completions endpoint.

use std::fmt;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::client::{Backend, BackendKind, CompletionRequest, CompletionResponse, LlmError};

pub const API_KEY_VAR: &str = "SIMFORGE_API_KEY";

/// Endpoint settings, usually read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    pub endpoint: String,
    pub engine_id: String,
    pub timeout_secs: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: "https://api.openai.com/v1/completions".into(),
            engine_id: "davinci-codex".into(),
            timeout_secs: 60,
        }
    }
}

impl LlmConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::BackendUnavailable { reason: format!("{}: {e}", path.display()) })?;
        toml::from_str(&text).map_err(|e| LlmError::BackendUnavailable { reason: format!("{}: {e}", path.display()) })
    }
}

/// An API key. Never printed, serialized or logged.
#[derive(Clone)]
pub struct ApiKey(String);

impl ApiKey {
    pub fn new(key: impl Into<String>) -> Self {
        ApiKey(key.into())
    }

    pub fn from_env() -> Result<Self, LlmError> {
        match std::env::var(API_KEY_VAR) {
            Ok(k) if !k.trim().is_empty() => Ok(ApiKey(k)),
            _ => Err(LlmError::AuthMissing),
        }
    }
}

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(<redacted>)")
    }
}

#[derive(Debug)]
pub struct LiveBackend {
    config: LlmConfig,
    key: ApiKey,
    agent: ureq::Agent,
}

impl LiveBackend {
    /// Reads the key from `SIMFORGE_API_KEY`.
    pub fn from_env(config: LlmConfig) -> Result<Self, LlmError> {
        Ok(Self::new(config, ApiKey::from_env()?))
    }

    pub fn new(config: LlmConfig, key: ApiKey) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        LiveBackend { config, key, agent }
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }
}

impl Backend for LiveBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Live
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        let p = &request.params;
        let body = json!({
            "model": p.engine_id,
            "prompt": request.prompt,
            "max_tokens": p.max_tokens,
            "temperature": p.temperature,
            "stop": p.stop_sequences,
        });
        let started = Instant::now();
        let elapsed = || started.elapsed().as_millis() as u64;
        let mut resp = self
            .agent
            .post(&self.config.endpoint)
            .header("Authorization", &format!("Bearer {}", self.key.0))
            .send_json(&body)
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => LlmError::Timeout { elapsed_ms: elapsed() },
                other => LlmError::BackendUnavailable { reason: other.to_string() },
            })?;
        let status = resp.status().as_u16();
        match status {
            200..=299 => {}
            401 | 403 => return Err(LlmError::AuthMissing),
            408 | 504 => return Err(LlmError::Timeout { elapsed_ms: elapsed() }),
            429 => {
                let retry_after_ms = resp
                    .headers()
                    .get("retry-after")
                    .and_then(|v| v.to_str().ok())
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .map(|s| (s * 1000.0) as u64);
                return Err(LlmError::RateLimited { retry_after_ms });
            }
            _ => return Err(LlmError::BackendUnavailable { reason: format!("HTTP {status}") }),
        }
        let value: serde_json::Value = resp.body_mut().read_json().map_err(|e| match e {
            ureq::Error::Timeout(_) => LlmError::Timeout { elapsed_ms: elapsed() },
            other => LlmError::BackendUnavailable { reason: format!("bad response body: {other}") },
        })?;
        let completion = value["choices"][0]["text"]
            .as_str()
            .ok_or_else(|| LlmError::BackendUnavailable { reason: "response has no choices[0].text".into() })?;
        Ok(CompletionResponse {
            completion: completion.to_string(),
            backend: BackendKind::Live,
            latency_ms: elapsed(),
            reported_tokens: value["usage"]["total_tokens"].as_u64().unwrap_or(0),
        })
    }
}
