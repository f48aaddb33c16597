//! HTTP front end for live sessions.

use std::collections::HashMap;
use std::convert::Infallible;
use std::net::SocketAddr;
use std::process::ExitCode;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use aerovln_core::eval::generate_scene;
use aerovln_core::executive::{PipelineConfig, DEFAULT_MAX_STEPS, DEFAULT_SUCCESS_RADIUS};
use aerovln_core::world::{validate_scene, Archetype, Scene};
use anyhow::{Context, Result};
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use clap::Args;
use futures::Stream;
use serde::Deserialize;
use serde_json::json;
use tokio::sync::{oneshot, watch};

use crate::batch::load_profile;
use crate::session::{
    self, Command, Control, SessionConfig, SessionError, SessionHandle, SessionState,
};

/// Schema tag accepted on request bodies.
pub const REQUEST_SCHEMA: &str = "session/1";

#[derive(Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Milliseconds between simulation steps of a running session.
    #[arg(long, default_value_t = 200)]
    pace_ms: u64,
}

#[derive(Clone)]
struct AppState {
    sessions: Arc<RwLock<HashMap<String, SessionHandle>>>,
    pace: Duration,
}

impl AppState {
    fn session(&self, id: &str) -> Result<SessionHandle, ApiError> {
        self.sessions
            .read()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("no session {id}")))
    }
}

#[derive(Debug)]
enum ApiError {
    NotFound(String),
    BadRequest(String),
    Session(SessionError),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::NotFound(m) => (
                StatusCode::NOT_FOUND,
                json!({"error": "not_found", "message": m}),
            ),
            ApiError::BadRequest(m) => (
                StatusCode::BAD_REQUEST,
                json!({"error": "bad_request", "message": m}),
            ),
            ApiError::Session(SessionError::Conflict(m)) => (
                StatusCode::CONFLICT,
                json!({"error": "conflict", "message": m}),
            ),
            ApiError::Session(SessionError::Parse { message, clause }) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({"error": "parse_error", "message": message, "clause": clause}),
            ),
            ApiError::Session(SessionError::Invalid(m)) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({"error": "invalid_instruction", "message": m}),
            ),
        };
        (status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::BadRequest(r.body_text())
    }
}

fn check_schema(schema: &Option<String>) -> Result<(), ApiError> {
    match schema {
        Some(s) if s != REQUEST_SCHEMA => Err(ApiError::BadRequest(format!(
            "unsupported schema {s:?}, expected {REQUEST_SCHEMA:?}"
        ))),
        _ => Ok(()),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    schema: Option<String>,
    /// Generated scene archetype; exclusive with `scene`.
    archetype: Option<String>,
    #[serde(default)]
    scene_seed: u64,
    /// Inline `scene/1` document.
    scene: Option<serde_json::Value>,
    #[serde(default = "default_profile")]
    profile: String,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_max_steps")]
    max_steps: usize,
    #[serde(default = "default_radius")]
    success_radius: f64,
}

fn default_profile() -> String {
    "ORACLE".into()
}

fn default_max_steps() -> usize {
    DEFAULT_MAX_STEPS
}

fn default_radius() -> f64 {
    DEFAULT_SUCCESS_RADIUS
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubmitInstruction {
    schema: Option<String>,
    text: String,
}

fn build_scene(req: &CreateSession) -> Result<Scene, ApiError> {
    let scene = match (&req.archetype, &req.scene) {
        (Some(name), None) => {
            let archetype: Archetype = name
                .parse()
                .map_err(|e: aerovln_core::Error| ApiError::BadRequest(e.to_string()))?;
            generate_scene(archetype, req.scene_seed)
        }
        (None, Some(doc)) => {
            Scene::from_json(&doc.to_string()).map_err(|e| ApiError::BadRequest(e.to_string()))?
        }
        _ => {
            return Err(ApiError::BadRequest(
                "give exactly one of archetype or scene".into(),
            ))
        }
    };
    let violations = validate_scene(&scene);
    if !violations.is_empty() {
        return Err(ApiError::BadRequest(format!(
            "invalid scene: {violations:?}"
        )));
    }
    Ok(scene)
}

async fn create(
    State(app): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<impl IntoResponse, ApiError> {
    let Json(req) = body?;
    check_schema(&req.schema)?;
    if req.max_steps == 0 || !(req.success_radius > 0.0) {
        return Err(ApiError::BadRequest(
            "max_steps and success_radius must be positive".into(),
        ));
    }
    let profile = load_profile(&req.profile).map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let config = SessionConfig {
        scene: build_scene(&req)?,
        pipeline: PipelineConfig::reference(profile),
        seed: req.seed,
        max_steps: req.max_steps,
        success_radius: req.success_radius,
        pace: app.pace,
    };
    let id = uuid::Uuid::new_v4().to_string();
    let handle = session::spawn(id.clone(), config);
    let state = handle.state.borrow().clone();
    app.sessions
        .write()
        .expect("session table lock")
        .insert(id.clone(), handle);
    Ok((
        StatusCode::CREATED,
        Json(json!({"session_id": id, "state": state})),
    ))
}

async fn ask<T>(
    handle: &SessionHandle,
    make: impl FnOnce(oneshot::Sender<T>) -> Command,
) -> Result<T, ApiError> {
    let (tx, rx) = oneshot::channel();
    let gone = || ApiError::NotFound("session has ended".into());
    handle.commands.send(make(tx)).await.map_err(|_| gone())?;
    rx.await.map_err(|_| gone())
}

async fn get_state(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionState>, ApiError> {
    Ok(Json(app.session(&id)?.state.borrow().clone()))
}

async fn get_scene(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let scene = app.session(&id)?.scene;
    Ok((
        [(header::CONTENT_TYPE, "application/json")],
        scene.to_json(),
    )
        .into_response())
}

async fn instruct(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<SubmitInstruction>, JsonRejection>,
) -> Result<impl IntoResponse, ApiError> {
    let handle = app.session(&id)?;
    let Json(req) = body?;
    check_schema(&req.schema)?;
    let plan = ask(&handle, |reply| Command::Instruct {
        text: req.text,
        reply,
    })
    .await?
    .map_err(ApiError::Session)?;
    let state = handle.state.borrow().clone();
    Ok(Json(json!({"plan": plan, "state": state})))
}

async fn control(
    State(app): State<AppState>,
    Path((id, op)): Path<(String, String)>,
) -> Result<Json<SessionState>, ApiError> {
    let op = Control::from_name(&op)
        .ok_or_else(|| ApiError::NotFound(format!("no session command {op:?}")))?;
    let handle = app.session(&id)?;
    ask(&handle, |reply| Command::Control { op, reply })
        .await?
        .map_err(ApiError::Session)?;
    let state = handle.state.borrow().clone();
    Ok(Json(state))
}

async fn log(State(app): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let handle = app.session(&id)?;
    let text = ask(&handle, |reply| Command::Log { reply })
        .await?
        .map_err(ApiError::Session)?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

async fn remove(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<StatusCode, ApiError> {
    match app
        .sessions
        .write()
        .expect("session table lock")
        .remove(&id)
    {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::NotFound(format!("no session {id}"))),
    }
}

fn frame(state: &SessionState) -> Result<Event, Infallible> {
    Ok(Event::default()
        .event("state")
        .json_data(state)
        .expect("state serializes"))
}

/// Current state on connect, then every change, with a repeat of the latest
/// state at least once per pace interval.
fn state_frames(
    rx: watch::Receiver<SessionState>,
    pace: Duration,
) -> impl Stream<Item = Result<Event, Infallible>> {
    futures::stream::unfold((rx, true), move |(mut rx, first)| async move {
        if !first {
            tokio::select! {
                changed = rx.changed() => changed.ok()?,
                _ = tokio::time::sleep(pace) => {}
            }
        }
        let state = rx.borrow_and_update().clone();
        Some((frame(&state), (rx, false)))
    })
}

async fn stream(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let handle = app.session(&id)?;
    Ok(Sse::new(state_frames(handle.state, app.pace)).keep_alive(KeepAlive::default()))
}

fn router(pace: Duration) -> Router {
    let app = AppState {
        sessions: Arc::default(),
        pace,
    };
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(get_state).delete(remove))
        .route("/sessions/{id}/scene", get(get_scene))
        .route("/sessions/{id}/instruction", post(instruct))
        .route("/sessions/{id}/log", get(log))
        .route("/sessions/{id}/stream", get(stream))
        .route("/sessions/{id}/{op}", post(control))
        .with_state(app)
}

pub fn serve(args: ServeArgs) -> Result<ExitCode> {
    let runtime = tokio::runtime::Runtime::new().context("starting the async runtime")?;
    runtime.block_on(async move {
        let addr: SocketAddr = format!("{}:{}", args.host, args.port)
            .parse()
            .with_context(|| format!("bad listen address {}:{}", args.host, args.port))?;
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        println!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(Duration::from_millis(args.pace_ms)))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .context("serving")?;
        Ok(ExitCode::SUCCESS)
    })
}
