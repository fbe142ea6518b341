//! Service configuration, read from TOML:
//!
//! ```toml
//! [backend]
//! kind = "replay"            # mock | replay | record | live | none
//! cache = "completions.sfc"
//! templates = "templates/"   # optional; the bundled templates otherwise
//!
//! [llm]
//! endpoint = "https://api.openai.com/v1/completions"
//! engine_id = "davinci-codex"
//! timeout_secs = 60
//!
//! [generation]
//! temperature = 0.0
//! max_tokens = 1024
//!
//! [limits]
//! max_steps = 10000000
//! max_series_points = 1000000
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use simforge_core::script::ExecLimits;
use simforge_llm::{Backend, GenerationParams, LiveBackend, LlmConfig, MockBackend, ReplayBackend, ReplayCache};

use crate::error::WorkflowError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    /// Bundled fixtures; no network.
    #[default]
    Mock,
    /// Answer only from the replay cache.
    Replay,
    /// Replay cache in front of the live API; misses are fetched and stored.
    Record,
    Live,
    None,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendChoice,
    pub cache: Option<PathBuf>,
    pub templates: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub temperature: f64,
    pub max_tokens: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        let p = GenerationParams::default();
        GenerationConfig { temperature: p.temperature, max_tokens: p.max_tokens }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsConfig {
    pub max_steps: u64,
    pub max_series_points: u64,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        let l = ExecLimits::default();
        LimitsConfig { max_steps: l.max_steps, max_series_points: l.max_series_points }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub backend: BackendConfig,
    pub llm: LlmConfig,
    pub generation: GenerationConfig,
    pub limits: LimitsConfig,
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Config, WorkflowError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| WorkflowError::storage(path.display(), e))?;
        Config::parse(&text).map_err(|e| WorkflowError::InvalidInput { reason: format!("{}: {e}", path.display()) })
    }

    pub fn parse(text: &str) -> Result<Config, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn params(&self) -> GenerationParams {
        GenerationParams {
            temperature: self.generation.temperature,
            max_tokens: self.generation.max_tokens,
            engine_id: self.llm.engine_id.clone(),
            ..GenerationParams::default()
        }
    }

    pub fn limits(&self) -> ExecLimits {
        ExecLimits { max_steps: self.limits.max_steps, max_series_points: self.limits.max_series_points }
    }

    /// Build the configured backend. The live key comes from the environment only.
    pub fn backend(&self) -> Result<Option<Arc<dyn Backend>>, WorkflowError> {
        let err = |e: simforge_llm::LlmError| WorkflowError::InvalidInput { reason: e.to_string() };
        let cache = || -> Result<ReplayCache, WorkflowError> {
            let path = self.backend.cache.as_ref().ok_or_else(|| WorkflowError::InvalidInput {
                reason: "backend.cache is required for the replay and record backends".into(),
            })?;
            ReplayCache::open(path).map_err(err)
        };
        Ok(match self.backend.kind {
            BackendChoice::None => None,
            BackendChoice::Mock => Some(Arc::new(MockBackend::new())),
            BackendChoice::Replay => Some(Arc::new(ReplayBackend::strict(cache()?))),
            BackendChoice::Record => {
                let live: Arc<dyn Backend> = Arc::new(LiveBackend::from_env(self.llm.clone()).map_err(err)?);
                Some(Arc::new(ReplayBackend::recording(cache()?, live)))
            }
            BackendChoice::Live => Some(Arc::new(LiveBackend::from_env(self.llm.clone()).map_err(err)?)),
        })
    }
}
