use serde::Serialize;
use thiserror::Error;

use crate::session::{Mode, State};

/// Errors an operation returns without changing the session. Failures of the work
/// itself (bad completion, runtime error) are recorded on the session instead.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "error")]
pub enum WorkflowError {
    #[error("description is empty")]
    EmptyDescription,
    #[error("cannot {operation} a {state} session in {mode:?} mode")]
    WrongState { operation: String, state: State, mode: Mode },
    #[error("a rejection needs a reason")]
    MissingReason,
    #[error("gated sessions are verified only with an expert sign-off")]
    MissingSignOff,
    #[error("no session {id}")]
    NotFound { id: String },
    #[error("no run {n} in session {id}")]
    NoRun { id: String, n: u32 },
    #[error("invalid input: {reason}")]
    InvalidInput { reason: String },
    #[error("event log is corrupt: {reason}")]
    Corrupt { reason: String },
    #[error("storage: {reason}")]
    Storage { reason: String },
}

impl WorkflowError {
    pub(crate) fn storage(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        WorkflowError::Storage { reason: format!("{context}: {e}") }
    }
}
