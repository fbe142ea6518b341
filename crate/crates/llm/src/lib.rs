//! Prompt construction and completion backends.
//!
//! [`promptkit`] turns a description into a prompt that fits the token window; a
//! [`Backend`] turns a prompt into a completion. Tests and demos use [`MockBackend`] or
//! a strict [`ReplayBackend`] and never touch the network.

pub mod cache;
pub mod client;
pub mod live;
pub mod mock;
pub mod promptkit;

pub use cache::{CacheEntry, ReplayBackend, ReplayCache};
pub use client::{
    Attempt, Backend, BackendKind, CompletionRequest, CompletionResponse, LlmError, RetryPolicy, Retrying,
};
pub use live::{ApiKey, LiveBackend, LlmConfig, API_KEY_VAR};
pub use mock::MockBackend;
pub use promptkit::{
    build_prompt, check_budget, estimate_tokens, Approach, BudgetExceeded, GenerationParams, PromptTemplate,
    TemplateStore, TOKEN_WINDOW,
};
