//! Prompt templates and the token-window budget.
//!
//! A prompt is `context`, `instructions`, a fixed answer-format instruction, the
//! description, the variable bindings, an optional worked example and the `pattern`
//! to continue, joined by [`SEPARATOR`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use simforge_core::frontend::VariableBinding;

/// Combined prompt + completion length of the target engine, in tokens.
pub const TOKEN_WINDOW: usize = 4096;

pub const SEPARATOR: &str = "\n\n";

/// Appended to every prompt so completions are machine-recognisable.
pub const FORMAT_INSTRUCTION: &str = "Answer with a SimScript program whose first line is `## simscript v1`, \
or with a simulation spec whose first line is `## simspec v1`. End the answer with a line `## end`.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Approach {
    /// Domain context, a detailed process description and the variables.
    #[serde(rename = "A_detailed")]
    Detailed,
    /// One-sentence context plus the variables to use.
    #[serde(rename = "B_minimal_with_bindings")]
    MinimalWithBindings,
    /// Detailed description plus a worked example.
    #[serde(rename = "C_detailed_with_example")]
    DetailedWithExample,
}

impl Approach {
    pub const ALL: [Approach; 3] = [Approach::Detailed, Approach::MinimalWithBindings, Approach::DetailedWithExample];

    pub fn as_str(self) -> &'static str {
        match self {
            Approach::Detailed => "A_detailed",
            Approach::MinimalWithBindings => "B_minimal_with_bindings",
            Approach::DetailedWithExample => "C_detailed_with_example",
        }
    }

    /// Accepts the full name or just its letter, case-insensitively.
    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s) || a.as_str()[..1].eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptTemplate {
    pub id: String,
    pub approach: Approach,
    /// Substring identifying prompts built from this template.
    pub marker: String,
    pub context: String,
    pub instructions: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<String>,
    pub pattern: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PromptError {
    #[error("description is empty")]
    EmptyDescription,
    #[error("template {id}: {reason}")]
    BadTemplate { id: String, reason: String },
    #[error("no template for approach {0}")]
    NoTemplate(Approach),
    #[error("unknown template {0}")]
    UnknownTemplate(String),
    #[error("reading templates: {0}")]
    Io(String),
}

impl PromptTemplate {
    pub fn from_toml(text: &str) -> Result<Self, PromptError> {
        let t: PromptTemplate =
            toml::from_str(text).map_err(|e| PromptError::BadTemplate { id: "?".into(), reason: e.to_string() })?;
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<(), PromptError> {
        let bad = |reason: &str| Err(PromptError::BadTemplate { id: self.id.clone(), reason: reason.into() });
        if self.context.trim().is_empty() {
            return bad("context is empty");
        }
        if self.marker.is_empty() || !self.context.contains(&self.marker) {
            return bad("context must contain the marker");
        }
        let has_example = self.example.as_deref().is_some_and(|e| !e.trim().is_empty());
        if self.approach == Approach::DetailedWithExample && !has_example {
            return bad("approach C needs a worked example");
        }
        Ok(())
    }

    /// Build the prompt for a description. Bindings appear in the given order.
    pub fn build(&self, description: &str, bindings: &[VariableBinding]) -> Result<String, PromptError> {
        let description = description.trim();
        if description.is_empty() {
            return Err(PromptError::EmptyDescription);
        }
        let mut parts = vec![
            self.context.as_str(),
            self.instructions.as_str(),
            FORMAT_INSTRUCTION,
            description,
        ];
        let vars = render_bindings(bindings);
        parts.push(&vars);
        if let Some(example) = &self.example {
            parts.push(example);
        }
        parts.push(&self.pattern);
        Ok(parts.join(SEPARATOR))
    }
}

fn render_bindings(bindings: &[VariableBinding]) -> String {
    let mut out = String::from("Variables:");
    if bindings.is_empty() {
        out.push_str(" none");
    }
    for b in bindings {
        out.push('\n');
        out.push_str(&b.to_string());
    }
    out
}

/// A template together with where it came from and the hash of its source bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedTemplate {
    pub template: PromptTemplate,
    /// Hex SHA-256 of the template file.
    pub hash: String,
    pub source: Option<PathBuf>,
}

impl LoadedTemplate {
    fn parse(text: &str, source: Option<PathBuf>) -> Result<Self, PromptError> {
        Ok(LoadedTemplate {
            template: PromptTemplate::from_toml(text)?,
            hash: hex::encode(Sha256::digest(text.as_bytes())),
            source,
        })
    }
}

const BUILTIN: [&str; 3] = [
    include_str!("../templates/inventory_a.toml"),
    include_str!("../templates/inventory_b.toml"),
    include_str!("../templates/queue_c.toml"),
];

/// Templates by id. Loaded from a directory of `*.toml` files (and re-readable with
/// [`TemplateStore::reload`]) or from the copies compiled into the crate.
#[derive(Debug, Clone)]
pub struct TemplateStore {
    dir: Option<PathBuf>,
    templates: BTreeMap<String, LoadedTemplate>,
}

impl TemplateStore {
    pub fn builtin() -> Self {
        let mut templates = BTreeMap::new();
        for text in BUILTIN {
            let t = LoadedTemplate::parse(text, None).expect("bundled templates are valid");
            templates.insert(t.template.id.clone(), t);
        }
        TemplateStore { dir: None, templates }
    }

    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let mut store = TemplateStore { dir: Some(dir.as_ref().to_path_buf()), templates: BTreeMap::new() };
        store.reload()?;
        Ok(store)
    }

    /// Re-read the directory. On error the previous templates are kept.
    pub fn reload(&mut self) -> Result<(), PromptError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let io = |e: std::io::Error| PromptError::Io(format!("{}: {e}", dir.display()));
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        paths.sort();
        let mut templates = BTreeMap::new();
        for path in paths {
            let text = std::fs::read_to_string(&path).map_err(io)?;
            let t = LoadedTemplate::parse(&text, Some(path.clone()))?;
            if templates.contains_key(&t.template.id) {
                return Err(PromptError::BadTemplate { id: t.template.id, reason: "duplicate id".into() });
            }
            templates.insert(t.template.id.clone(), t);
        }
        self.templates = templates;
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&LoadedTemplate, PromptError> {
        self.templates.get(id).ok_or_else(|| PromptError::UnknownTemplate(id.to_string()))
    }

    /// First template (by id) implementing `approach`.
    pub fn for_approach(&self, approach: Approach) -> Result<&LoadedTemplate, PromptError> {
        self.templates.values().find(|t| t.template.approach == approach).ok_or(PromptError::NoTemplate(approach))
    }

    pub fn iter(&self) -> impl Iterator<Item = &LoadedTemplate> {
        self.templates.values()
    }
}

/// Build a prompt from the bundled template for `approach`.
pub fn build_prompt(approach: Approach, description: &str, bindings: &[VariableBinding]) -> Result<String, PromptError> {
    TemplateStore::builtin().for_approach(approach)?.template.build(description, bindings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub temperature: f64,
    pub max_tokens: usize,
    pub stop_sequences: Vec<String>,
    pub engine_id: String,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            temperature: 0.0,
            max_tokens: 1024,
            stop_sequences: vec![simforge_core::codegen::END_MARKER.to_string()],
            engine_id: "davinci-codex".to_string(),
        }
    }
}

/// Approximate token count: one token per four bytes, rounded up. Real tokenizers vary;
/// the live backend's reported count is logged alongside.
pub fn estimate_tokens(text: &str) -> usize {
    text.len().div_ceil(4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("prompt and completion exceed the {TOKEN_WINDOW}-token window by {overshoot}")]
pub struct BudgetExceeded {
    pub overshoot: usize,
}

pub fn check_budget(prompt: &str, params: &GenerationParams) -> Result<(), BudgetExceeded> {
    let total = estimate_tokens(prompt) + params.max_tokens;
    if total <= TOKEN_WINDOW {
        Ok(())
    } else {
        Err(BudgetExceeded { overshoot: total - TOKEN_WINDOW })
    }
}
