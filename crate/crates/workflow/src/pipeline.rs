//! The operations that advance a session. Each one takes the session's lock, replays
//! its log, checks the transition, does the work and appends the resulting events.

use std::fmt::Debug;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use simforge_core::codegen::{parse_llm_output, Artifact};
use simforge_core::frontend::{classify_domain, extract_bindings, parse_controlled, GRAMMAR_VERSION};
use simforge_core::ir::{serialize_canonical, SystemKind};
use simforge_core::script::{interpret, ExecLimits, RunFailure, SIMSCRIPT_VERSION};
use simforge_core::validation::{
    check_dynamic, check_static, check_static_spec, compare_to_oracle, Check, OracleContract, ValidationReport,
};
use simforge_core::{engines, RunResult};
use simforge_llm::client::Sleeper;
use simforge_llm::{Approach, Backend, CompletionRequest, GenerationParams, RetryPolicy, Retrying, TemplateStore};

use crate::artifacts::{to_csv, Plot};
use crate::config::Config;
use crate::error::WorkflowError;
use crate::session::{
    Approval, ArtifactKind, ArtifactRecord, CompletionRecord, Decision, Event, EventKind, Failure, FrontendKind, Mode,
    PromptRecord, ReportRecord, RunRecord, Runner, Session, SignOff, State,
};
use crate::store::Store;

pub const RESULT_FILE: &str = "result.json";
pub const CSV_FILE: &str = "series.csv";
pub const SVG_FILE: &str = "plot.svg";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewSession {
    pub description: String,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_frontend")]
    pub frontend: FrontendKind,
    /// Prompt approach for the LLM frontend; picked from the description when absent.
    #[serde(default)]
    pub approach: Option<Approach>,
}

fn default_mode() -> Mode {
    Mode::Gated
}

fn default_frontend() -> FrontendKind {
    FrontendKind::Llm
}

impl NewSession {
    pub fn new(description: impl Into<String>, mode: Mode, frontend: FrontendKind) -> Self {
        NewSession { description: description.into(), mode, frontend, approach: None }
    }
}

/// Queue descriptions get the template with a worked example, everything else the
/// detailed inventory template.
pub fn default_approach(description: &str) -> Approach {
    match classify_domain(description) {
        Some(SystemKind::Queue) => Approach::DetailedWithExample,
        _ => Approach::Detailed,
    }
}

/// Variant name of an error, from its `Debug` form.
pub fn kind_of(e: &impl Debug) -> String {
    let s = format!("{e:?}");
    s.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').collect()
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// JSON has no NaN or infinity; such measurements are dropped rather than stored as null.
fn finite_report(mut report: ValidationReport) -> ValidationReport {
    for c in &mut report.checks {
        c.measured.retain(|_, v| v.is_finite());
    }
    report
}

pub struct Workflow {
    store: Store,
    templates: TemplateStore,
    backend: Option<Arc<dyn Backend>>,
    params: GenerationParams,
    limits: ExecLimits,
    retry: RetryPolicy,
    sleeper: Sleeper,
}

impl Workflow {
    /// Bundled templates, default limits, no completion backend.
    pub fn new(store: Store) -> Self {
        Workflow {
            store,
            templates: TemplateStore::builtin(),
            backend: None,
            params: GenerationParams::default(),
            limits: ExecLimits::default(),
            retry: RetryPolicy::default(),
            sleeper: Arc::new(std::thread::sleep),
        }
    }

    pub fn from_config(store: Store, config: &Config) -> Result<Self, WorkflowError> {
        let mut wf = Workflow::new(store).with_params(config.params()).with_limits(config.limits());
        if let Some(dir) = &config.backend.templates {
            let t = TemplateStore::from_dir(dir).map_err(|e| WorkflowError::InvalidInput { reason: e.to_string() })?;
            wf = wf.with_templates(t);
        }
        if let Some(b) = config.backend()? {
            wf = wf.with_backend(b);
        }
        Ok(wf)
    }

    pub fn with_backend(mut self, backend: Arc<dyn Backend>) -> Self {
        self.backend = Some(backend);
        self
    }

    pub fn with_templates(mut self, templates: TemplateStore) -> Self {
        self.templates = templates;
        self
    }

    pub fn with_params(mut self, params: GenerationParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_limits(mut self, limits: ExecLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn with_retry(mut self, policy: RetryPolicy, sleeper: Sleeper) -> Self {
        self.retry = policy;
        self.sleeper = sleeper;
        self
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn session(&self, id: &str) -> Result<Session, WorkflowError> {
        self.store.load(id)
    }

    pub fn sessions(&self) -> Result<Vec<Session>, WorkflowError> {
        self.store.list()
    }

    fn commit(&self, session: &mut Session, kind: EventKind) -> Result<(), WorkflowError> {
        let event = Event { seq: session.version + 1, at_ms: now_ms(), kind };
        session.apply(&event)?;
        self.store.append(&session.id, &event)
    }

    fn fail(
        &self,
        session: &mut Session,
        stage: &str,
        kind: String,
        message: String,
        run: Option<RunRecord>,
    ) -> Result<(), WorkflowError> {
        let failure = Failure { stage: stage.to_string(), kind, message };
        self.commit(session, EventKind::Failed { failure, run })
    }

    /// Run `f` on the session with its transitions serialized against other callers.
    fn advance<F>(&self, id: &str, f: F) -> Result<Session, WorkflowError>
    where
        F: FnOnce(&mut Session) -> Result<(), WorkflowError>,
    {
        if !self.store.exists(id) {
            return Err(WorkflowError::NotFound { id: id.to_string() });
        }
        let lock = self.store.lock(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut session = self.store.load(id)?;
        f(&mut session)?;
        Ok(session)
    }

    pub fn submit(&self, new: NewSession) -> Result<Session, WorkflowError> {
        if new.description.trim().is_empty() {
            return Err(WorkflowError::EmptyDescription);
        }
        let id = uuid::Uuid::new_v4().to_string();
        let event = Event {
            seq: 1,
            at_ms: now_ms(),
            kind: EventKind::Created {
                id: id.clone(),
                mode: new.mode,
                frontend: new.frontend,
                approach: new.approach,
                description: new.description,
                grammar_version: GRAMMAR_VERSION.to_string(),
                simscript_version: SIMSCRIPT_VERSION.to_string(),
            },
        };
        let session = Session::create(&event)?;
        self.store.create(&id, &event)?;
        Ok(session)
    }

    /// Produce the artifact. `description` replaces the current one first (used when
    /// regenerating a rejected session); earlier descriptions and prompts stay in the log.
    pub fn generate(&self, id: &str, description: Option<String>) -> Result<Session, WorkflowError> {
        self.advance(id, |s| {
            if !s.can_generate() {
                return Err(WorkflowError::WrongState { operation: "generate".into(), state: s.state, mode: s.mode });
            }
            if let Some(d) = description {
                if d != s.description {
                    self.commit(s, EventKind::DescriptionEdited { description: d })?;
                }
            }
            match s.frontend {
                FrontendKind::Deterministic => self.generate_deterministic(s),
                FrontendKind::Llm => self.generate_llm(s),
            }
        })
    }

    fn generate_deterministic(&self, s: &mut Session) -> Result<(), WorkflowError> {
        let spec = match parse_controlled(&s.description) {
            Ok(spec) => spec,
            Err(e) => return self.fail(s, "generate", kind_of(&e.kind), e.to_string(), None),
        };
        let text = match serialize_canonical(&spec) {
            Ok(t) => t,
            Err(e) => return self.fail(s, "generate", kind_of(&e), e.to_string(), None),
        };
        let report = finite_report(check_static_spec(&spec));
        let artifact = ArtifactRecord { kind: ArtifactKind::Spec, text };
        self.commit(s, EventKind::Generated { artifact, reference: Some(spec), report })
    }

    fn generate_llm(&self, s: &mut Session) -> Result<(), WorkflowError> {
        let description = s.description.clone();
        let bindings = match extract_bindings(&description) {
            Ok(b) => b,
            Err(e) => return self.fail(s, "prompt", kind_of(&e.kind), e.to_string(), None),
        };
        let approach = s.approach.unwrap_or_else(|| default_approach(&description));
        let built = self
            .templates
            .for_approach(approach)
            .and_then(|t| Ok((t, t.template.build(&description, &bindings)?)));
        let (loaded, prompt) = match built {
            Ok(x) => x,
            Err(e) => return self.fail(s, "prompt", kind_of(&e), e.to_string(), None),
        };
        let record = PromptRecord {
            prompt: prompt.clone(),
            template_id: loaded.template.id.clone(),
            template_hash: loaded.hash.clone(),
            params: self.params.clone(),
        };
        self.commit(s, EventKind::PromptBuilt(record))?;

        let request = match CompletionRequest::new(prompt, self.params.clone()) {
            Ok(r) => r,
            Err(e) => return self.fail(s, "prompt", "BudgetExceeded".into(), e.to_string(), None),
        };
        let Some(backend) = self.backend.clone() else {
            return self.fail(s, "complete", "BackendUnavailable".into(), "no completion backend configured".into(), None);
        };
        let client = Retrying::with_sleeper(backend, self.retry, self.sleeper.clone());
        let (response, attempts) = client.complete_logged(&request);
        let response = match response {
            Ok(r) => r,
            Err(e) => {
                let message = format!("{e} (after {} attempt(s))", attempts.len());
                return self.fail(s, "complete", kind_of(&e), message, None);
            }
        };
        let completion = response.completion.clone();
        self.commit(
            s,
            EventKind::Completed(CompletionRecord {
                completion: response.completion,
                backend: response.backend,
                latency_ms: response.latency_ms,
                reported_tokens: response.reported_tokens,
                attempts,
            }),
        )?;

        let artifact = match parse_llm_output(&completion) {
            Ok(a) => a,
            Err(e) => return self.fail(s, "parse", kind_of(&e), e.to_string(), None),
        };
        let report = finite_report(check_static(&artifact));
        let record = match &artifact {
            Artifact::Spec(spec) => match serialize_canonical(spec) {
                Ok(text) => ArtifactRecord { kind: ArtifactKind::Spec, text },
                Err(e) => return self.fail(s, "parse", kind_of(&e), e.to_string(), None),
            },
            Artifact::Program { source, .. } => ArtifactRecord { kind: ArtifactKind::Program, text: source.clone() },
        };
        let reference = parse_controlled(&description).ok();
        self.commit(s, EventKind::Generated { artifact: record, reference, report })
    }

    pub fn approve(&self, id: &str, actor: &str, reason: Option<String>) -> Result<Session, WorkflowError> {
        self.decide(id, actor, Decision::Approve, reason)
    }

    pub fn reject(&self, id: &str, actor: &str, reason: Option<String>) -> Result<Session, WorkflowError> {
        self.decide(id, actor, Decision::Reject, reason)
    }

    pub fn decide(
        &self,
        id: &str,
        actor: &str,
        decision: Decision,
        reason: Option<String>,
    ) -> Result<Session, WorkflowError> {
        if actor.trim().is_empty() {
            return Err(WorkflowError::InvalidInput { reason: "actor is required".into() });
        }
        let reason = reason.filter(|r| !r.trim().is_empty());
        self.advance(id, |s| {
            let approval = Approval { actor: actor.to_string(), decision, reason, at_ms: now_ms() };
            self.commit(s, EventKind::Decided { approval })
        })
    }

    /// Run the artifact. The seed is `seed`, else the spec's seed, else 0.
    pub fn execute(&self, id: &str, seed: Option<u64>) -> Result<Session, WorkflowError> {
        self.advance(id, |s| {
            if !s.can_execute() {
                return Err(WorkflowError::WrongState { operation: "execute".into(), state: s.state, mode: s.mode });
            }
            let artifact =
                s.artifact.clone().ok_or_else(|| WorkflowError::Corrupt { reason: "executable session has no artifact".into() })?;
            let truth = s.ground_truth();
            let seed = seed.or(truth.as_ref().map(|t| t.seed)).unwrap_or(0);
            let n = s.runs.len() as u32 + 1;

            let parsed = match parse_llm_output(&artifact.text) {
                Ok(a) => a,
                Err(e) => return self.fail(s, "execute", kind_of(&e), e.to_string(), None),
            };
            let (result, runner, error) = match parsed {
                Artifact::Spec(spec) => match engines::run(&spec, seed) {
                    Ok(r) => (r, Runner::Engine, None),
                    Err(e) => return self.fail(s, "execute", kind_of(&e), e.to_string(), None),
                },
                Artifact::Program { program, .. } => match interpret(&program, seed, self.limits) {
                    Ok(r) => (r, Runner::Interpreter, None),
                    Err(RunFailure { error, partial }) => {
                        (partial, Runner::Interpreter, Some((kind_of(&error), error.to_string())))
                    }
                },
            };
            let error = error.or_else(|| {
                let bad = result.series.iter().find(|(_, p)| p.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()));
                bad.map(|(name, _)| ("NonFiniteValue".to_string(), format!("series {name} has a non-finite point")))
            });
            self.write_run(&s.id, n, &result, truth.as_ref())?;
            let record = RunRecord {
                n,
                seed,
                runner,
                points: result.point_count(),
                events: result.events.len(),
                steps_used: result.steps_used,
                partial: error.is_some(),
            };
            match error {
                Some((kind, message)) => self.fail(s, "execute", kind, message, Some(record)),
                None => self.commit(s, EventKind::Executed(record)),
            }
        })
    }

    fn write_run(
        &self,
        id: &str,
        n: u32,
        result: &RunResult,
        spec: Option<&simforge_core::SimulationSpec>,
    ) -> Result<(), WorkflowError> {
        let dir = self.store.run_dir(id, n);
        let mut stored = result.clone();
        stored.summary.retain(|_, v| v.is_finite());
        let json = serde_json::to_vec_pretty(&stored).map_err(|e| WorkflowError::storage("encoding run", e))?;
        self.store.write_file(&dir.join(RESULT_FILE), &json)?;
        self.store.write_file(&dir.join(CSV_FILE), to_csv(result).as_bytes())?;
        self.store.write_file(&dir.join(SVG_FILE), Plot::new(result, spec).to_svg().as_bytes())
    }

    /// Attach the machine report for the latest run, then mark the session verified.
    /// Gated sessions need `sign_off`; without it the report is attached and the session
    /// stays `Executed` for the expert to look at.
    pub fn verify(&self, id: &str, sign_off: Option<(String, Option<String>)>) -> Result<Session, WorkflowError> {
        if sign_off.as_ref().is_some_and(|(actor, _)| actor.trim().is_empty()) {
            return Err(WorkflowError::InvalidInput { reason: "actor is required".into() });
        }
        self.advance(id, |s| {
            if s.state != State::Executed {
                return Err(WorkflowError::WrongState { operation: "verify".into(), state: s.state, mode: s.mode });
            }
            let run = s.latest_run().cloned().ok_or_else(|| WorkflowError::Corrupt { reason: "executed without a run".into() })?;
            if s.run_report(run.n).is_none() {
                let result = self.run_result(&s.id, run.n)?;
                let report = finite_report(dynamic_report(s, &result, &run));
                self.commit(s, EventKind::ReportAttached(ReportRecord { run: Some(run.n), report }))?;
            }
            if s.mode == Mode::Gated && sign_off.is_none() {
                return Ok(());
            }
            let sign_off = sign_off.map(|(actor, reason)| SignOff {
                actor,
                reason: reason.filter(|r| !r.trim().is_empty()),
                at_ms: now_ms(),
            });
            self.commit(s, EventKind::Verified { sign_off })
        })
    }

    pub fn run_result(&self, id: &str, n: u32) -> Result<RunResult, WorkflowError> {
        let bytes = self.run_file(id, n, RESULT_FILE)?;
        serde_json::from_slice(&bytes).map_err(|e| WorkflowError::Corrupt { reason: format!("run {n}: {e}") })
    }

    /// Bytes of a file in a recorded run.
    pub fn run_file(&self, id: &str, n: u32, name: &str) -> Result<Vec<u8>, WorkflowError> {
        let session = self.store.load(id)?;
        if !session.runs.iter().any(|r| r.n == n) {
            return Err(WorkflowError::NoRun { id: id.to_string(), n });
        }
        self.store.read_file(&self.store.run_dir(id, n).join(name))
    }

    /// Sessions breaking the gated rule: a gated session with a run on disk, or a run in
    /// its log, that no approval precedes. Empty when the store is consistent.
    pub fn audit_gated(&self) -> Result<Vec<String>, WorkflowError> {
        let mut bad = Vec::new();
        for id in self.store.ids()? {
            let events = self.store.events(&id)?;
            let session = Session::replay(&events)?;
            if session.mode != Mode::Gated {
                continue;
            }
            let on_disk = self.store.session_dir(&id).join("runs").exists();
            if on_disk && session.approvals.is_empty() {
                bad.push(format!("{id}: run artifacts without any approval"));
                continue;
            }
            let mut approved = false;
            for e in &events {
                match &e.kind {
                    EventKind::Generated { .. } => approved = false,
                    EventKind::Decided { approval: a } => approved = a.decision == Decision::Approve,
                    EventKind::Executed(_) | EventKind::Failed { run: Some(_), .. } if !approved => {
                        bad.push(format!("{id}: run at seq {} without approval", e.seq));
                    }
                    _ => {}
                }
            }
        }
        Ok(bad)
    }
}

/// Invariant checks on the run plus the comparison with the reference engine. Spec
/// artifacts ran on that engine, so the trace must match exactly; programs only have to
/// agree in distribution.
pub fn dynamic_report(session: &Session, result: &RunResult, run: &RunRecord) -> ValidationReport {
    let Some(spec) = session.ground_truth() else {
        return ValidationReport::new(vec![Check::skip(
            "verify.ground_truth",
            "the description does not parse under the controlled grammar, so there is no spec to check the run against",
        )]);
    };
    let contract = match session.artifact.as_ref().map(|a| a.kind) {
        Some(ArtifactKind::Spec) => OracleContract::Exact,
        _ => OracleContract::Distribution,
    };
    check_dynamic(result, &spec).merge(compare_to_oracle(result, &spec, run.seed, contract))
}
