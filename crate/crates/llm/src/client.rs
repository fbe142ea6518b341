use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::promptkit::{check_budget, BudgetExceeded, GenerationParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub params: GenerationParams,
}

impl CompletionRequest {
    /// Fails when the prompt and `max_tokens` do not fit the token window.
    pub fn new(prompt: impl Into<String>, params: GenerationParams) -> Result<Self, BudgetExceeded> {
        let prompt = prompt.into();
        check_budget(&prompt, &params)?;
        Ok(CompletionRequest { prompt, params })
    }

    pub fn digest(&self) -> String {
        crate::cache::request_digest(&self.prompt, &self.params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Live,
    Replay,
    Mock,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Live => "live",
            BackendKind::Replay => "replay",
            BackendKind::Mock => "mock",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResponse {
    pub completion: String,
    pub backend: BackendKind,
    pub latency_ms: u64,
    /// Token count reported by the service; 0 when unavailable.
    pub reported_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum LlmError {
    #[error("SIMFORGE_API_KEY is not set")]
    AuthMissing,
    #[error("request timed out after {elapsed_ms} ms")]
    Timeout { elapsed_ms: u64 },
    #[error("rate limited{}", retry_after_ms.map(|ms| format!(", retry after {ms} ms")).unwrap_or_default())]
    RateLimited { retry_after_ms: Option<u64> },
    #[error("no cached completion for digest {digest}")]
    CacheMiss { digest: String },
    #[error("backend unavailable: {reason}")]
    BackendUnavailable { reason: String },
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("cache already holds digest {digest}")]
    Duplicate { digest: String },
    #[error("cache entry {entry} is corrupt: {reason}")]
    Integrity { entry: usize, reason: String },
    #[error("cache storage: {reason}")]
    Storage { reason: String },
}

impl LlmError {
    pub fn is_transient(&self) -> bool {
        matches!(self, LlmError::Timeout { .. } | LlmError::RateLimited { .. })
    }
}

/// A text-in, text-out completion service.
pub trait Backend: Send + Sync {
    fn kind(&self) -> BackendKind;
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, LlmError>;
}

impl<B: Backend + ?Sized> Backend for Arc<B> {
    fn kind(&self) -> BackendKind {
        (**self).kind()
    }
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        (**self).complete(request)
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn kind(&self) -> BackendKind {
        (**self).kind()
    }
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        (**self).complete(request)
    }
}

/// Cut a completion at the first stop sequence, as completion services do.
pub fn apply_stop_sequences(text: &str, stops: &[String]) -> String {
    let cut = stops.iter().filter(|s| !s.is_empty()).filter_map(|s| text.find(s.as_str())).min();
    text[..cut.unwrap_or(text.len())].to_string()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 3, base_delay: Duration::from_millis(500) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub attempt: u32,
    /// `None` on success.
    pub error: Option<String>,
    /// Time slept before this attempt.
    pub waited_ms: u64,
}

pub type Sleeper = Arc<dyn Fn(Duration) + Send + Sync>;

/// Retries transient failures with exponential backoff: `base_delay · 2^(n-1)` before
/// attempt `n + 1`, or the server's retry-after hint when that is longer.
pub struct Retrying<B> {
    inner: B,
    policy: RetryPolicy,
    sleep: Sleeper,
}

impl<B: Backend> Retrying<B> {
    pub fn new(inner: B, policy: RetryPolicy) -> Self {
        Self::with_sleeper(inner, policy, Arc::new(std::thread::sleep))
    }

    pub fn with_sleeper(inner: B, policy: RetryPolicy, sleep: Sleeper) -> Self {
        Retrying { inner, policy, sleep }
    }

    pub fn complete_logged(&self, request: &CompletionRequest) -> (Result<CompletionResponse, LlmError>, Vec<Attempt>) {
        let mut log = Vec::new();
        let mut waited = Duration::ZERO;
        let mut n = 1;
        loop {
            match self.inner.complete(request) {
                Ok(r) => {
                    log.push(Attempt { attempt: n, error: None, waited_ms: waited.as_millis() as u64 });
                    return (Ok(r), log);
                }
                Err(e) => {
                    log.push(Attempt { attempt: n, error: Some(e.to_string()), waited_ms: waited.as_millis() as u64 });
                    if !e.is_transient() || n >= self.policy.max_attempts {
                        return (Err(e), log);
                    }
                    let backoff = self.policy.base_delay * 2u32.pow(n - 1);
                    waited = match e {
                        LlmError::RateLimited { retry_after_ms: Some(ms) } => backoff.max(Duration::from_millis(ms)),
                        _ => backoff,
                    };
                    (self.sleep)(waited);
                    n += 1;
                }
            }
        }
    }
}

impl<B: Backend> Backend for Retrying<B> {
    fn kind(&self) -> BackendKind {
        self.inner.kind()
    }
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        self.complete_logged(request).0
    }
}
