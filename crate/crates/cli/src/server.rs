//! HTTP/JSON interface for stepping and analysis.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ccslm::coherence::check_lts;
use ccslm::lts::explore;
use ccslm::session::Session;
use ccslm::wire::{coherence_doc, lts_doc, outgoing_docs};
use ccslm::{Diagnostic, Error, Program};
use serde::Deserialize;
use serde_json::json;

use crate::StepReply;

struct Entry {
    program: Program,
    session: Mutex<Session>,
}

#[derive(Default)]
pub struct Registry {
    next: AtomicU64,
    programs: Mutex<HashMap<u64, Arc<Entry>>>,
}

impl Registry {
    fn insert(&self, program: Program) -> Result<u64, Error> {
        let session = Session::new(&program)?;
        let id = self.next.fetch_add(1, Ordering::Relaxed);
        let entry = Arc::new(Entry {
            program,
            session: Mutex::new(session),
        });
        self.programs.lock().unwrap().insert(id, entry);
        Ok(id)
    }

    fn get(&self, id: u64) -> Result<Arc<Entry>, ApiError> {
        self.programs
            .lock()
            .unwrap()
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no program {id}")))
    }
}

pub struct ApiError {
    status: StatusCode,
    message: String,
    diagnostics: Vec<Diagnostic>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::UnknownState(_) => StatusCode::NOT_FOUND,
            Error::Stale { .. } | Error::NoSuchTransition { .. } => StatusCode::CONFLICT,
            Error::Syntax(_) | Error::IllFormed(_) | Error::UnresolvedName(_) | Error::InvalidConfig(_) => {
                StatusCode::BAD_REQUEST
            }
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError {
            status,
            diagnostics: e.diagnostics().to_vec(),
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.message, "diagnostics": self.diagnostics });
        (self.status, Json(body)).into_response()
    }
}

type Reply = Result<Json<serde_json::Value>, ApiError>;

fn to_value(v: impl serde::Serialize) -> Json<serde_json::Value> {
    Json(serde_json::to_value(v).expect("documents serialize"))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

#[derive(Deserialize)]
struct NewProgram {
    source: String,
}

async fn create(State(reg): State<Arc<Registry>>, Json(body): Json<NewProgram>) -> Reply {
    let program = ccslm::load(&body.source)?;
    let id = reg.insert(program)?;
    Ok(Json(json!({ "programId": id, "diagnostics": [] })))
}

async fn transitions(State(reg): State<Arc<Registry>>, Path((id, sid)): Path<(u64, usize)>) -> Reply {
    let entry = reg.get(id)?;
    let mut session = entry.session.lock().unwrap();
    session.transitions(sid)?;
    Ok(to_value(outgoing_docs(&session.graph_so_far(), sid)))
}

#[derive(Deserialize)]
struct StepBody {
    from: usize,
    index: usize,
}

async fn step(State(reg): State<Arc<Registry>>, Path(id): Path<u64>, Json(body): Json<StepBody>) -> Reply {
    let entry = reg.get(id)?;
    let mut session = entry.session.lock().unwrap();
    let new_state = session.step(body.from, body.index)?;
    Ok(to_value(StepReply {
        new_state,
        state_term: session.state_term(new_state)?.to_string(),
    }))
}

async fn undo(State(reg): State<Arc<Registry>>, Path(id): Path<u64>) -> Reply {
    let entry = reg.get(id)?;
    let mut session = entry.session.lock().unwrap();
    let state = session
        .undo()
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "nothing to undo"))?;
    Ok(to_value(StepReply {
        new_state: state,
        state_term: session.state_term(state)?.to_string(),
    }))
}

#[derive(Deserialize)]
struct Analysis {
    bound: Option<usize>,
    cong: Option<String>,
    labels: Option<String>,
}

async fn lts(State(reg): State<Arc<Registry>>, Path(id): Path<u64>, Query(q): Query<Analysis>) -> Reply {
    let entry = reg.get(id)?;
    let bound = q.bound.unwrap_or(ccslm::DEFAULT_BOUND);
    let lts = blocking(move || explore(&entry.program, bound)).await??;
    Ok(to_value(lts_doc(&lts)))
}

async fn coherence(State(reg): State<Arc<Registry>>, Path(id): Path<u64>, Query(q): Query<Analysis>) -> Reply {
    let entry = reg.get(id)?;
    let cfg = crate::congruence(q.cong.as_deref(), q.labels.as_deref())
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    let bound = q.bound.unwrap_or(ccslm::DEFAULT_BOUND);
    let report = blocking(move || check_lts(&explore(&entry.program, bound)?, cfg)).await??;
    Ok(to_value(coherence_doc(&report)))
}

/// The API routes over a fresh registry.
pub fn router() -> Router {
    router_with(Arc::new(Registry::default()))
}

pub fn router_with(reg: Arc<Registry>) -> Router {
    Router::new()
        .route("/program", post(create))
        .route("/program/{id}/state/{sid}/transitions", get(transitions))
        .route("/program/{id}/step", post(step))
        .route("/program/{id}/undo", post(undo))
        .route("/program/{id}/lts", get(lts))
        .route("/program/{id}/coherence", get(coherence))
        .with_state(reg)
}

/// Listens on `port` until interrupted. A preloaded program gets id 0.
pub async fn serve(port: u16, preload: Option<String>) -> Result<(), Box<dyn std::error::Error>> {
    let reg = Arc::new(Registry::default());
    if let Some(src) = preload {
        reg.insert(ccslm::load(&src)?)?;
    }
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router_with(reg)).await?;
    Ok(())
}
