//! Sessions as a fold over their event log.
//!
//! Every change to a session is an [`Event`]. [`Session::apply`] is the only place
//! state moves, and it refuses transitions that are not on the graph:
//!
//! ```text
//! Described ──generate──▶ PromptBuilt ──▶ Generated ──approve──▶ Approved ──execute──▶ Executed ──verify──▶ Verified
//!     │                                      │  └──reject──▶ Rejected ──generate──▶ …        ▲
//!     └──────────generate (deterministic)────┘  └──execute (single runtime)──────────────────┘
//! ```
//!
//! Any step that fails on its input lands in `Failed`.

use serde::{Deserialize, Serialize};
use simforge_core::validation::ValidationReport;
use simforge_core::SimulationSpec;
use simforge_llm::{Approach, Attempt, BackendKind, GenerationParams};

use crate::error::WorkflowError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Generate, run and check in one go; the expert reviews afterwards.
    SingleRuntime,
    /// Each step waits for the expert.
    Gated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontendKind {
    Deterministic,
    Llm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum State {
    Described,
    PromptBuilt,
    Generated,
    Approved,
    Rejected,
    Executed,
    Verified,
    Failed,
}

impl std::fmt::Display for State {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Spec,
    Program,
}

/// The generated artifact as text: canonical spec text or SimScript source. Both start
/// with their sentinel line, so the text alone is enough to parse it back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub kind: ArtifactKind,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Approve,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approval {
    pub actor: String,
    pub decision: Decision,
    pub reason: Option<String>,
    pub at_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignOff {
    pub actor: String,
    pub reason: Option<String>,
    pub at_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Runner {
    Engine,
    Interpreter,
}

/// A run on disk under `runs/<n>/`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: u32,
    pub seed: u64,
    pub runner: Runner,
    pub points: usize,
    pub events: usize,
    pub steps_used: u64,
    /// The run stopped with an error; what is on disk is the trace up to that point.
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    /// Error variant name, e.g. `UnrecognizedArtifact` or `StepBudgetExceeded`.
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub prompt: String,
    pub template_id: String,
    pub template_hash: String,
    pub params: GenerationParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub completion: String,
    pub backend: BackendKind,
    pub latency_ms: u64,
    pub reported_tokens: u64,
    pub attempts: Vec<Attempt>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    /// `None` for the static report of the artifact.
    pub run: Option<u32>,
    pub report: ValidationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    Created {
        id: String,
        mode: Mode,
        frontend: FrontendKind,
        approach: Option<Approach>,
        description: String,
        grammar_version: String,
        simscript_version: String,
    },
    DescriptionEdited {
        description: String,
    },
    PromptBuilt(PromptRecord),
    Completed(CompletionRecord),
    Generated {
        artifact: ArtifactRecord,
        /// Spec parsed from the description by the controlled grammar, if it parses.
        reference: Option<SimulationSpec>,
        report: ValidationReport,
    },
    Decided {
        approval: Approval,
    },
    Executed(RunRecord),
    ReportAttached(ReportRecord),
    Verified {
        sign_off: Option<SignOff>,
    },
    Failed {
        failure: Failure,
        run: Option<RunRecord>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub at_ms: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub mode: Mode,
    pub frontend: FrontendKind,
    pub approach: Option<Approach>,
    pub state: State,
    pub description: String,
    /// Every description the session has had, oldest first.
    pub descriptions: Vec<String>,
    pub grammar_version: String,
    pub simscript_version: String,
    /// Every prompt built, oldest first. The last one is current.
    pub prompts: Vec<PromptRecord>,
    pub completions: Vec<CompletionRecord>,
    pub artifact: Option<ArtifactRecord>,
    pub reference: Option<SimulationSpec>,
    pub approvals: Vec<Approval>,
    pub runs: Vec<RunRecord>,
    pub reports: Vec<ReportRecord>,
    pub sign_off: Option<SignOff>,
    pub failure: Option<Failure>,
    pub created_ms: u64,
    pub updated_ms: u64,
    /// Sequence number of the last applied event.
    pub version: u64,
}

impl Session {
    /// Start a session from its `Created` event.
    pub fn create(event: &Event) -> Result<Session, WorkflowError> {
        let EventKind::Created { id, mode, frontend, approach, description, grammar_version, simscript_version } =
            &event.kind
        else {
            return Err(WorkflowError::Corrupt { reason: "log does not start with a created event".into() });
        };
        if event.seq != 1 {
            return Err(WorkflowError::Corrupt { reason: format!("created event has seq {}", event.seq) });
        }
        if description.trim().is_empty() {
            return Err(WorkflowError::EmptyDescription);
        }
        Ok(Session {
            id: id.clone(),
            mode: *mode,
            frontend: *frontend,
            approach: *approach,
            state: State::Described,
            description: description.clone(),
            descriptions: vec![description.clone()],
            grammar_version: grammar_version.clone(),
            simscript_version: simscript_version.clone(),
            prompts: Vec::new(),
            completions: Vec::new(),
            artifact: None,
            reference: None,
            approvals: Vec::new(),
            runs: Vec::new(),
            reports: Vec::new(),
            sign_off: None,
            failure: None,
            created_ms: event.at_ms,
            updated_ms: event.at_ms,
            version: 1,
        })
    }

    /// Rebuild a session from its full log.
    pub fn replay(events: &[Event]) -> Result<Session, WorkflowError> {
        let (first, rest) =
            events.split_first().ok_or_else(|| WorkflowError::Corrupt { reason: "empty event log".into() })?;
        let mut session = Session::create(first)?;
        for e in rest {
            session.apply(e)?;
        }
        Ok(session)
    }

    fn wrong(&self, operation: &str) -> WorkflowError {
        WorkflowError::WrongState { operation: operation.to_string(), state: self.state, mode: self.mode }
    }

    pub fn can_generate(&self) -> bool {
        matches!(self.state, State::Described | State::PromptBuilt | State::Rejected)
    }

    pub fn can_execute(&self) -> bool {
        match self.mode {
            Mode::Gated => self.state == State::Approved,
            Mode::SingleRuntime => self.state == State::Generated,
        }
    }

    /// The approval that let the latest artifact through, if any.
    pub fn approved(&self) -> bool {
        self.approvals.last().is_some_and(|a| a.decision == Decision::Approve)
    }

    pub fn latest_run(&self) -> Option<&RunRecord> {
        self.runs.last()
    }

    pub fn static_report(&self) -> Option<&ValidationReport> {
        self.reports.iter().rev().find(|r| r.run.is_none()).map(|r| &r.report)
    }

    pub fn run_report(&self, n: u32) -> Option<&ValidationReport> {
        self.reports.iter().rev().find(|r| r.run == Some(n)).map(|r| &r.report)
    }

    /// Spec the artifact is checked against: the artifact itself when it is a spec,
    /// otherwise whatever the controlled grammar made of the description.
    pub fn ground_truth(&self) -> Option<SimulationSpec> {
        match &self.artifact {
            Some(ArtifactRecord { kind: ArtifactKind::Spec, text }) => simforge_core::ir::parse_canonical(text).ok(),
            _ => self.reference.clone(),
        }
    }

    /// Check that `event` is a legal next step without applying it.
    pub fn check(&self, event: &Event) -> Result<(), WorkflowError> {
        self.clone().apply(event)
    }

    pub fn apply(&mut self, event: &Event) -> Result<(), WorkflowError> {
        if event.seq != self.version + 1 {
            return Err(WorkflowError::Corrupt {
                reason: format!("event seq {} follows {}", event.seq, self.version),
            });
        }
        match &event.kind {
            EventKind::Created { .. } => return Err(WorkflowError::Corrupt { reason: "second created event".into() }),
            EventKind::DescriptionEdited { description } => {
                if !self.can_generate() {
                    return Err(self.wrong("edit description"));
                }
                if description.trim().is_empty() {
                    return Err(WorkflowError::EmptyDescription);
                }
                self.description = description.clone();
                self.descriptions.push(description.clone());
            }
            EventKind::PromptBuilt(p) => {
                if !self.can_generate() || self.frontend != FrontendKind::Llm {
                    return Err(self.wrong("build prompt"));
                }
                self.prompts.push(p.clone());
                self.state = State::PromptBuilt;
            }
            EventKind::Completed(c) => {
                if self.state != State::PromptBuilt {
                    return Err(self.wrong("complete"));
                }
                self.completions.push(c.clone());
            }
            EventKind::Generated { artifact, reference, report } => {
                let ok = match self.frontend {
                    FrontendKind::Deterministic => matches!(self.state, State::Described | State::Rejected),
                    FrontendKind::Llm => self.state == State::PromptBuilt,
                };
                if !ok {
                    return Err(self.wrong("generate"));
                }
                self.artifact = Some(artifact.clone());
                self.reference = reference.clone();
                self.reports.push(ReportRecord { run: None, report: report.clone() });
                self.state = State::Generated;
            }
            EventKind::Decided { approval: a } => {
                if self.state != State::Generated || self.mode != Mode::Gated {
                    return Err(self.wrong(match a.decision {
                        Decision::Approve => "approve",
                        Decision::Reject => "reject",
                    }));
                }
                if a.decision == Decision::Reject && a.reason.as_deref().is_none_or(|r| r.trim().is_empty()) {
                    return Err(WorkflowError::MissingReason);
                }
                self.approvals.push(a.clone());
                self.state = match a.decision {
                    Decision::Approve => State::Approved,
                    Decision::Reject => State::Rejected,
                };
            }
            EventKind::Executed(run) => {
                if !self.can_execute() {
                    return Err(self.wrong("execute"));
                }
                self.runs.push(run.clone());
                self.state = State::Executed;
            }
            EventKind::ReportAttached(r) => {
                if self.state != State::Executed || r.run != self.latest_run().map(|run| run.n) {
                    return Err(self.wrong("attach report"));
                }
                self.reports.push(r.clone());
            }
            EventKind::Verified { sign_off } => {
                let reported = self.latest_run().is_some_and(|run| self.run_report(run.n).is_some());
                if self.state != State::Executed || !reported {
                    return Err(self.wrong("verify"));
                }
                if self.mode == Mode::Gated && sign_off.is_none() {
                    return Err(WorkflowError::MissingSignOff);
                }
                self.sign_off = sign_off.clone();
                self.state = State::Verified;
            }
            EventKind::Failed { failure, run } => {
                if matches!(self.state, State::Verified | State::Failed) {
                    return Err(self.wrong("fail"));
                }
                if let Some(run) = run {
                    if !self.can_execute() {
                        return Err(self.wrong("execute"));
                    }
                    self.runs.push(run.clone());
                }
                self.failure = Some(failure.clone());
                self.state = State::Failed;
            }
        }
        self.version = event.seq;
        self.updated_ms = event.at_ms;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use simforge_core::validation::{Check, ValidationReport};

    fn ev(seq: u64, kind: EventKind) -> Event {
        Event { seq, at_ms: seq * 10, kind }
    }

    fn created(mode: Mode, frontend: FrontendKind) -> Event {
        ev(
            1,
            EventKind::Created {
                id: "s1".into(),
                mode,
                frontend,
                approach: None,
                description: "simulate for 10 minutes.".into(),
                grammar_version: "g".into(),
                simscript_version: "s".into(),
            },
        )
    }

    fn generated(seq: u64) -> Event {
        ev(
            seq,
            EventKind::Generated {
                artifact: ArtifactRecord { kind: ArtifactKind::Program, text: "## simscript v1\n".into() },
                reference: None,
                report: ValidationReport::new(vec![Check::pass("x", "")]),
            },
        )
    }

    fn run(seq: u64) -> Event {
        ev(
            seq,
            EventKind::Executed(RunRecord {
                n: 1,
                seed: 0,
                runner: Runner::Interpreter,
                points: 0,
                events: 0,
                steps_used: 0,
                partial: false,
            }),
        )
    }

    fn decide(seq: u64, decision: Decision, reason: Option<&str>) -> Event {
        let approval = Approval { actor: "ana".into(), decision, reason: reason.map(Into::into), at_ms: 0 };
        ev(seq, EventKind::Decided { approval })
    }

    #[test]
    fn gated_execute_needs_approval() {
        let mut s = Session::create(&created(Mode::Gated, FrontendKind::Deterministic)).unwrap();
        s.apply(&generated(2)).unwrap();
        assert!(matches!(s.check(&run(3)), Err(WorkflowError::WrongState { state: State::Generated, .. })));
        s.apply(&decide(3, Decision::Approve, None)).unwrap();
        s.apply(&run(4)).unwrap();
        assert_eq!(s.state, State::Executed);
    }

    #[test]
    fn single_runtime_skips_approval() {
        let mut s = Session::create(&created(Mode::SingleRuntime, FrontendKind::Deterministic)).unwrap();
        s.apply(&generated(2)).unwrap();
        assert!(matches!(s.check(&decide(3, Decision::Approve, None)), Err(WorkflowError::WrongState { .. })));
        s.apply(&run(3)).unwrap();
        assert_eq!(s.state, State::Executed);
    }

    #[test]
    fn reject_needs_reason_and_allows_regeneration() {
        let mut s = Session::create(&created(Mode::Gated, FrontendKind::Deterministic)).unwrap();
        s.apply(&generated(2)).unwrap();
        assert_eq!(s.check(&decide(3, Decision::Reject, Some("  "))), Err(WorkflowError::MissingReason));
        s.apply(&decide(3, Decision::Reject, Some("wrong lead time"))).unwrap();
        assert_eq!(s.state, State::Rejected);
        s.apply(&generated(4)).unwrap();
        assert_eq!(s.state, State::Generated);
    }

    #[test]
    fn gated_verify_needs_sign_off() {
        let mut s = Session::create(&created(Mode::Gated, FrontendKind::Deterministic)).unwrap();
        for e in [generated(2), decide(3, Decision::Approve, None), run(4)] {
            s.apply(&e).unwrap();
        }
        // no report yet
        assert!(matches!(s.check(&ev(5, EventKind::Verified { sign_off: None })), Err(WorkflowError::WrongState { .. })));
        s.apply(&ev(5, EventKind::ReportAttached(ReportRecord { run: Some(1), report: ValidationReport::new(vec![]) })))
            .unwrap();
        assert_eq!(s.check(&ev(6, EventKind::Verified { sign_off: None })), Err(WorkflowError::MissingSignOff));
        let sign = SignOff { actor: "ana".into(), reason: None, at_ms: 0 };
        s.apply(&ev(6, EventKind::Verified { sign_off: Some(sign) })).unwrap();
        assert_eq!(s.state, State::Verified);
    }

    #[test]
    fn out_of_order_seq_is_corrupt() {
        let mut s = Session::create(&created(Mode::Gated, FrontendKind::Deterministic)).unwrap();
        assert!(matches!(s.apply(&generated(3)), Err(WorkflowError::Corrupt { .. })));
    }

    #[test]
    fn events_round_trip_through_json() {
        let e = decide(3, Decision::Reject, Some("no"));
        let line = serde_json::to_string(&e).unwrap();
        assert!(line.contains("\"type\":\"decided\""), "{line}");
        assert_eq!(serde_json::from_str::<Event>(&line).unwrap(), e);
    }
}
