//! JSON API over a [`Workflow`].
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/sessions` | `{description, mode?, frontend?, approach?}` |
//! | POST | `/sessions/{id}/generate` | `{description?}` |
//! | POST | `/sessions/{id}/approve` | `{actor, reason?}` |
//! | POST | `/sessions/{id}/reject` | `{actor, reason}` |
//! | POST | `/sessions/{id}/execute` | `{seed?}` |
//! | POST | `/sessions/{id}/verify` | `{actor?, reason?}` |
//! | GET | `/sessions`, `/sessions/{id}`, `/sessions/{id}/report` | |
//! | GET | `/sessions/{id}/runs/{n}/series.csv`, `/sessions/{id}/runs/{n}/plot.svg` | |

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State as AxState};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use simforge_core::validation::ValidationReport;

use crate::error::WorkflowError;
use crate::pipeline::{NewSession, Workflow, CSV_FILE, SVG_FILE};
use crate::session::{Mode, Session, State};

type Shared = Arc<Workflow>;

impl IntoResponse for WorkflowError {
    fn into_response(self) -> Response {
        let status = match &self {
            WorkflowError::NotFound { .. } | WorkflowError::NoRun { .. } => StatusCode::NOT_FOUND,
            WorkflowError::WrongState { .. } => StatusCode::CONFLICT,
            WorkflowError::EmptyDescription
            | WorkflowError::MissingReason
            | WorkflowError::MissingSignOff
            | WorkflowError::InvalidInput { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            WorkflowError::Corrupt { .. } | WorkflowError::Storage { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let mut body = serde_json::to_value(&self).unwrap_or_default();
        body["message"] = self.to_string().into();
        (status, Json(body)).into_response()
    }
}

/// Sessions advance with blocking file IO and simulation work; keep it off the reactor.
async fn blocking<T, F>(wf: Shared, f: F) -> Result<T, WorkflowError>
where
    T: Send + 'static,
    F: FnOnce(&Workflow) -> Result<T, WorkflowError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&wf))
        .await
        .map_err(|e| WorkflowError::Storage { reason: format!("worker panicked: {e}") })?
}

/// Request bodies are optional where every field is; an empty body means `{}`.
fn body<T: for<'de> Deserialize<'de> + Default>(bytes: &Bytes) -> Result<T, WorkflowError> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(bytes).map_err(|e| WorkflowError::InvalidInput { reason: e.to_string() })
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateBody {
    description: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecisionBody {
    #[serde(default)]
    actor: String,
    reason: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExecuteBody {
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyBody {
    actor: Option<String>,
    reason: Option<String>,
}

#[derive(Debug, Serialize)]
struct Summary {
    id: String,
    state: State,
    mode: Mode,
    description: String,
    runs: usize,
    created_ms: u64,
    updated_ms: u64,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    id: &'a str,
    state: State,
    #[serde(rename = "static")]
    static_report: Option<&'a ValidationReport>,
    run: Option<u32>,
    dynamic: Option<&'a ValidationReport>,
}

pub fn router(wf: Arc<Workflow>) -> Router {
    Router::new()
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/generate", post(generate))
        .route("/sessions/{id}/approve", post(approve))
        .route("/sessions/{id}/reject", post(reject))
        .route("/sessions/{id}/execute", post(execute))
        .route("/sessions/{id}/verify", post(verify))
        .route("/sessions/{id}/report", get(report))
        .route("/sessions/{id}/runs/{n}/{file}", get(run_file))
        .with_state(wf)
}

async fn create(AxState(wf): AxState<Shared>, bytes: Bytes) -> Result<(StatusCode, Json<Session>), WorkflowError> {
    let new: NewSession =
        serde_json::from_slice(&bytes).map_err(|e| WorkflowError::InvalidInput { reason: e.to_string() })?;
    let s = blocking(wf, move |wf| wf.submit(new)).await?;
    Ok((StatusCode::CREATED, Json(s)))
}

async fn list(AxState(wf): AxState<Shared>) -> Result<Json<Vec<Summary>>, WorkflowError> {
    let all = blocking(wf, |wf| wf.sessions()).await?;
    Ok(Json(
        all.into_iter()
            .map(|s| Summary {
                runs: s.runs.len(),
                id: s.id,
                state: s.state,
                mode: s.mode,
                description: s.description,
                created_ms: s.created_ms,
                updated_ms: s.updated_ms,
            })
            .collect(),
    ))
}

async fn show(AxState(wf): AxState<Shared>, Path(id): Path<String>) -> Result<Json<Session>, WorkflowError> {
    Ok(Json(blocking(wf, move |wf| wf.session(&id)).await?))
}

async fn generate(
    AxState(wf): AxState<Shared>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Json<Session>, WorkflowError> {
    let b: GenerateBody = body(&bytes)?;
    Ok(Json(blocking(wf, move |wf| wf.generate(&id, b.description)).await?))
}

async fn approve(
    AxState(wf): AxState<Shared>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Json<Session>, WorkflowError> {
    let b: DecisionBody = body(&bytes)?;
    Ok(Json(blocking(wf, move |wf| wf.approve(&id, &b.actor, b.reason)).await?))
}

async fn reject(
    AxState(wf): AxState<Shared>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Json<Session>, WorkflowError> {
    let b: DecisionBody = body(&bytes)?;
    Ok(Json(blocking(wf, move |wf| wf.reject(&id, &b.actor, b.reason)).await?))
}

async fn execute(
    AxState(wf): AxState<Shared>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Json<Session>, WorkflowError> {
    let b: ExecuteBody = body(&bytes)?;
    Ok(Json(blocking(wf, move |wf| wf.execute(&id, b.seed)).await?))
}

async fn verify(
    AxState(wf): AxState<Shared>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Json<Session>, WorkflowError> {
    let b: VerifyBody = body(&bytes)?;
    let sign_off = b.actor.map(|a| (a, b.reason));
    Ok(Json(blocking(wf, move |wf| wf.verify(&id, sign_off)).await?))
}

async fn report(AxState(wf): AxState<Shared>, Path(id): Path<String>) -> Result<Response, WorkflowError> {
    let s = blocking(wf, move |wf| wf.session(&id)).await?;
    let run = s.latest_run().map(|r| r.n);
    let r = Report {
        id: &s.id,
        state: s.state,
        static_report: s.static_report(),
        run,
        dynamic: run.and_then(|n| s.run_report(n)),
    };
    Ok(Json(r).into_response())
}

async fn run_file(
    AxState(wf): AxState<Shared>,
    Path((id, n, file)): Path<(String, u32, String)>,
) -> Result<Response, WorkflowError> {
    let content_type = match file.as_str() {
        CSV_FILE => "text/csv; charset=utf-8",
        SVG_FILE => "image/svg+xml",
        _ => return Err(WorkflowError::NotFound { id: format!("{id}/runs/{n}/{file}") }),
    };
    let bytes = blocking(wf, move |wf| wf.run_file(&id, n, &file)).await?;
    Ok(([(header::CONTENT_TYPE, content_type)], bytes).into_response())
}

/// Serve until the process is stopped.
pub async fn serve(wf: Arc<Workflow>, addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(wf)).await
}
