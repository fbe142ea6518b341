//! Session workflow for the simforge pipeline: description in, verified simulation out.
//!
//! A [`Workflow`] advances sessions through generate, approve, execute and verify,
//! recording every step in a per-session event log. The same operations back the
//! `simforge` command line tool and the HTTP API in [`http`].

pub mod artifacts;
pub mod config;
pub mod error;
pub mod http;
pub mod pipeline;
pub mod session;
pub mod store;

pub use config::Config;
pub use error::WorkflowError;
pub use pipeline::{NewSession, Workflow};
pub use session::{Decision, Event, EventKind, FrontendKind, Mode, Session, State};
pub use store::Store;
