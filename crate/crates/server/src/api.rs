use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use orderlearn::order::{Label, NodeId, Pair};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::error::ServiceError;
use crate::session::Session;
use crate::store::{CreateSession, SessionStore, SharedSession};

type ApiResult<T> = Result<T, ServiceError>;

#[derive(Debug, Deserialize)]
pub struct LabelRequest {
    pub src: u32,
    pub dst: u32,
    pub label: i64,
}

/// Routes under `/api`, plus static files from `ui_dir` at `/` when given.
pub fn router(store: Arc<SessionStore>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/datasets", get(list_datasets))
        .route("/api/sessions", post(create_session).get(list_sessions))
        .route("/api/sessions/{id}/next", get(next_query))
        .route("/api/sessions/{id}/labels", post(submit_label))
        .route("/api/sessions/{id}/stats", get(session_stats))
        .route("/api/sessions/{id}/log", get(download_log))
        .route("/api/sessions/{id}/closure", get(closure_dump))
        .with_state(store);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ServiceError::BadRequest(e.body_text()))
}

/// Runs `f` on the session off the async executor; selection can be
/// CPU-heavy.
async fn with_session<T, F>(store: &SessionStore, id: &str, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&mut Session) -> ApiResult<T> + Send + 'static,
{
    let session: SharedSession = store.get(id)?;
    tokio::task::spawn_blocking(move || {
        let mut guard = session.lock().expect("session lock poisoned");
        f(&mut guard)
    })
    .await
    .expect("session task panicked")
}

async fn list_datasets(State(store): State<Arc<SessionStore>>) -> Json<Value> {
    Json(json!({ "datasets": store.catalog().list() }))
}

async fn list_sessions(State(store): State<Arc<SessionStore>>) -> Json<Value> {
    Json(json!({ "sessions": store.list() }))
}

async fn create_session(
    State(store): State<Arc<SessionStore>>,
    payload: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let req = body(payload)?;
    let store2 = Arc::clone(&store);
    let id = tokio::task::spawn_blocking(move || store2.create(&req))
        .await
        .expect("create task panicked")?;
    Ok(Json(json!({ "id": id })))
}

async fn next_query(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let next = with_session(&store, &id, |s| s.next_query()).await?;
    Ok(Json(match next {
        Some(q) => json!(q),
        None => json!({ "exhausted": true }),
    }))
}

async fn submit_label(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    payload: Result<Json<LabelRequest>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let req = body(payload)?;
    let label = Label::from_sign(req.label)
        .ok_or_else(|| ServiceError::BadRequest(format!("label must be 1 or -1, got {}", req.label)))?;
    let pair = Pair {
        src: NodeId(req.src),
        dst: NodeId(req.dst),
    };
    let out = with_session(&store, &id, move |s| s.submit(pair, label)).await?;
    Ok(Json(json!(out)))
}

async fn session_stats(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let stats = with_session(&store, &id, |s| Ok(s.stats())).await?;
    Ok(Json(json!(stats)))
}

async fn download_log(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult<Response> {
    let (path, name) = with_session(&store, &id, |s| Ok((s.log_path().to_path_buf(), format!("{}.jsonl", s.meta().id))))
        .await?;
    let bytes = tokio::task::spawn_blocking(move || std::fs::read(path))
        .await
        .expect("read task panicked")?;
    Ok((
        [
            (header::CONTENT_TYPE, "application/x-ndjson".to_string()),
            (header::CONTENT_DISPOSITION, format!("attachment; filename=\"{name}\"")),
        ],
        bytes,
    )
        .into_response())
}

async fn closure_dump(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult<Response> {
    let dump = with_session(&store, &id, |s| Ok(s.dump())).await?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], dump).into_response())
}
