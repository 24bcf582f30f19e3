//! Routes and handlers.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use starpath::hydra::{HydraParams, HydraPolicy, Variant};
use tokio::sync::{Mutex, RwLock};

use crate::session::{Session, SessionError, StateView};
use crate::snapshot::{self, SnapshotError};

type Shared = Arc<Mutex<Session>>;

/// The session table. Each session sits behind its own lock, so moves on
/// one session never wait for another.
#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Shared>>>,
    snapshot: Option<Arc<PathBuf>>,
}

impl AppState {
    pub fn new(snapshot: Option<PathBuf>) -> AppState {
        AppState {
            sessions: Arc::default(),
            snapshot: snapshot.map(Arc::new),
        }
    }

    /// A table restored from the snapshot file, if one is configured.
    pub fn restore(snapshot: Option<PathBuf>) -> Result<AppState, SnapshotError> {
        let state = AppState::new(snapshot);
        if let Some(path) = &state.snapshot {
            let sessions = snapshot::load(path)?;
            let mut table = state.sessions.try_write().expect("fresh table");
            for s in sessions {
                table.insert(s.id.clone(), Arc::new(Mutex::new(s)));
            }
        }
        Ok(state)
    }

    /// Writes the snapshot file, if one is configured.
    pub async fn persist(&self) -> Result<(), SnapshotError> {
        let Some(path) = &self.snapshot else {
            return Ok(());
        };
        let shared: Vec<Shared> = self.sessions.read().await.values().cloned().collect();
        let mut sessions = Vec::with_capacity(shared.len());
        for s in shared {
            sessions.push(s.lock().await.clone());
        }
        sessions.sort_by(|a, b| a.id.cmp(&b.id));
        let path = path.as_ref().clone();
        tokio::task::spawn_blocking(move || snapshot::save(&path, sessions))
            .await
            .expect("snapshot writer does not panic")
    }

    pub async fn session_count(&self) -> usize {
        self.sessions.read().await.len()
    }

    async fn get(&self, id: &str) -> Result<Shared, ApiError> {
        self.sessions.read().await.get(id).cloned().ok_or_else(|| {
            ApiError::new(
                StatusCode::NOT_FOUND,
                "not-found",
                format!("no session {id}"),
            )
        })
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(get_state).delete(delete))
        .route("/sessions/{id}/chop", post(chop))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/log", get(export_log))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    state: Option<StateView>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: String) -> ApiError {
        ApiError {
            status,
            code,
            message,
            state: None,
        }
    }

    fn from_session(e: SessionError, state: Option<StateView>) -> ApiError {
        let (status, code) = match &e {
            SessionError::Invalid(_) => (StatusCode::BAD_REQUEST, "invalid"),
            SessionError::Illegal(_) => (StatusCode::CONFLICT, "illegal-move"),
            SessionError::Params(_) => (StatusCode::UNPROCESSABLE_ENTITY, "params-out-of-domain"),
            SessionError::NothingToUndo => (StatusCode::CONFLICT, "nothing-to-undo"),
            SessionError::Certificate(_) => (StatusCode::INTERNAL_SERVER_ERROR, "certificate"),
        };
        ApiError {
            status,
            code,
            message: e.to_string(),
            state,
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad-request", r.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.message, "code": self.code });
        if let Some(s) = self.state {
            body["state"] = serde_json::to_value(s).expect("views serialize");
        }
        (self.status, Json(body)).into_response()
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

/// A policy as `fixed:2`-style text or as a full object.
#[derive(Deserialize)]
#[serde(untagged)]
enum PolicySpec {
    Text(String),
    Full(HydraPolicy),
}

#[derive(Deserialize)]
struct CreateBody {
    variant: Variant,
    initial: String,
    #[serde(default)]
    hydra_policy: Option<PolicySpec>,
    #[serde(default)]
    seed: u64,
}

#[derive(Serialize)]
struct Created {
    session_id: String,
    state: StateView,
}

async fn create(
    State(app): State<AppState>,
    body: Result<Json<CreateBody>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(body) = body?;
    let policy = match body.hydra_policy {
        None => HydraPolicy::fixed(2),
        Some(PolicySpec::Full(p)) => p,
        Some(PolicySpec::Text(t)) => HydraPolicy::parse(&t, body.seed)
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid", e))?,
    };
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Session::new(
        id.clone(),
        body.variant,
        &body.initial,
        policy,
        body.seed,
        now(),
    )
    .map_err(|e| ApiError::from_session(e, None))?;
    let state = session.view();
    app.sessions
        .write()
        .await
        .insert(id.clone(), Arc::new(Mutex::new(session)));
    Ok((
        StatusCode::CREATED,
        Json(Created {
            session_id: id,
            state,
        }),
    )
        .into_response())
}

async fn get_state(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<StateView>, ApiError> {
    let s = app.get(&id).await?;
    let view = s.lock().await.view();
    Ok(Json(view))
}

#[derive(Deserialize)]
struct ChopBody {
    head_id: u64,
    #[serde(default)]
    params: Option<HydraParams>,
    #[serde(default)]
    want_certificate: bool,
}

async fn chop(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<ChopBody>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(body) = body?;
    let s = app.get(&id).await?;
    let mut session = s.lock().await;
    // Moves can be expensive; keep them off the async workers.
    let outcome = tokio::task::block_in_place(|| {
        session.chop(body.head_id, body.params, body.want_certificate, now())
    });
    match outcome {
        Ok(o) => Ok(Json(o).into_response()),
        Err(e) => Err(ApiError::from_session(e, Some(session.view()))),
    }
}

async fn undo(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<StateView>, ApiError> {
    let s = app.get(&id).await?;
    let mut session = s.lock().await;
    session
        .undo(now())
        .map(Json)
        .map_err(|e| ApiError::from_session(e, Some(session.view())))
}

async fn export_log(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let s = app.get(&id).await?;
    let lines = s.lock().await.export_log();
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], lines).into_response())
}

async fn delete(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<StatusCode, ApiError> {
    match app.sessions.write().await.remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::new(
            StatusCode::NOT_FOUND,
            "not-found",
            format!("no session {id}"),
        )),
    }
}
