//! HTTP front end for live sessions. See `docs/api.md` for the wire format.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use ticc_core::domain::{ActionOutcome, AgentAction};
use ticc_core::experiment::EpisodeLog;
use ticc_core::session::{
    MoveView, RoundResult, SessionError, SessionEvent, SessionSettings, SessionView, ViewRole,
};
use ticc_core::{PlannerMode, Session};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ApiError {
    pub code: String,
    pub message: String,
}

pub struct Failure(StatusCode, ApiError);

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Self {
        let status = match e {
            SessionError::NotFound(_) => StatusCode::NOT_FOUND,
            SessionError::Conflict(_) => StatusCode::CONFLICT,
            SessionError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Failure(status, ApiError { code: e.code().to_string(), message: e.to_string() })
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, Failure>;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default = "default_scenario")]
    pub scenario: String,
    #[serde(default = "default_mode")]
    pub mode: PlannerMode,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
}

fn default_scenario() -> String {
    "human-study".into()
}
fn default_mode() -> PlannerMode {
    PlannerMode::Ticc
}
fn default_samples() -> usize {
    10_000
}
fn default_rounds() -> usize {
    5
}

impl From<CreateSession> for SessionSettings {
    fn from(c: CreateSession) -> Self {
        SessionSettings { scenario: c.scenario, mode: c.mode, samples: c.samples, seed: c.seed, rounds: c.rounds }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct ViewQuery {
    #[serde(default = "default_role")]
    pub role: ViewRole,
}

fn default_role() -> ViewRole {
    ViewRole::Spectator
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct HumanStep {
    pub action_kind: ActionKind,
    #[serde(default)]
    pub item: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Pick,
    Noop,
    SignalIncapable,
}

impl HumanStep {
    pub fn from_action(action: AgentAction) -> Self {
        match action {
            AgentAction::Pick(i) => HumanStep { action_kind: ActionKind::Pick, item: Some(i) },
            AgentAction::NoOp => HumanStep { action_kind: ActionKind::Noop, item: None },
            AgentAction::SignalIncapable(i) => HumanStep { action_kind: ActionKind::SignalIncapable, item: Some(i) },
        }
    }

    pub fn action(&self) -> Result<AgentAction, SessionError> {
        let item = || self.item.ok_or_else(|| SessionError::Invalid(format!("{:?} needs an item", self.action_kind)));
        Ok(match self.action_kind {
            ActionKind::Pick => AgentAction::Pick(item()?),
            ActionKind::SignalIncapable => AgentAction::SignalIncapable(item()?),
            ActionKind::Noop => AgentAction::NoOp,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobotStepResponse {
    pub action: AgentAction,
    pub outcome: ActionOutcome,
    pub view: SessionView,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HumanStepResponse {
    pub outcome: ActionOutcome,
    pub round_result: Option<RoundResult>,
    pub view: SessionView,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionLog {
    pub session_id: String,
    pub settings: SessionSettings,
    pub rounds: Vec<EpisodeLog>,
    pub events: Vec<SessionEvent>,
}

/// In-memory session store.
#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

impl AppState {
    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, SessionError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::NotFound(format!("no session `{id}`")))
    }
}

pub fn router() -> Router {
    router_with(Arc::new(AppState::default()))
}

pub fn router_with(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/view", get(get_view))
        .route("/sessions/{id}/robot-step", post(robot_step))
        .route("/sessions/{id}/human-step", post(human_step))
        .route("/sessions/{id}/log", get(get_log))
        .with_state(state)
}

/// Runs `f` on the session off the async executor; searches are CPU bound.
async fn with_session<F, R>(state: &AppState, id: &str, f: F) -> Result<R, Failure>
where
    F: FnOnce(&mut Session) -> Result<R, SessionError> + Send + 'static,
    R: Send + 'static,
{
    let session = state.get(id)?;
    tokio::task::spawn_blocking(move || {
        let mut guard = session.lock().unwrap();
        f(&mut guard)
    })
    .await
    .map_err(|e| Failure(StatusCode::INTERNAL_SERVER_ERROR, ApiError { code: "internal".into(), message: e.to_string() }))?
    .map_err(Failure::from)
}

async fn create_session(State(state): State<Arc<AppState>>, Json(body): Json<CreateSession>) -> Result<(StatusCode, Json<SessionView>), Failure> {
    let id = format!("s{}", state.next_id.fetch_add(1, Ordering::Relaxed) + 1);
    let settings = SessionSettings::from(body);
    let session_id = id.clone();
    let session = tokio::task::spawn_blocking(move || Session::create(session_id, settings))
        .await
        .map_err(|e| Failure(StatusCode::INTERNAL_SERVER_ERROR, ApiError { code: "internal".into(), message: e.to_string() }))??;
    let view = session.view(ViewRole::Human);
    state.sessions.write().unwrap().insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_view(State(state): State<Arc<AppState>>, Path(id): Path<String>, Query(q): Query<ViewQuery>) -> ApiResult<SessionView> {
    let session = state.get(&id)?;
    let view = session.lock().unwrap().view(q.role);
    Ok(Json(view))
}

async fn robot_step(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<RobotStepResponse> {
    let resp = with_session(&state, &id, |s| {
        let MoveView { action, outcome } = s.robot_step()?;
        Ok(RobotStepResponse { action, outcome, view: s.view(ViewRole::Spectator) })
    })
    .await?;
    Ok(Json(resp))
}

async fn human_step(State(state): State<Arc<AppState>>, Path(id): Path<String>, Json(body): Json<HumanStep>) -> ApiResult<HumanStepResponse> {
    let action = body.action()?;
    let resp = with_session(&state, &id, move |s| {
        let (outcome, round_result) = s.human_step(action)?;
        Ok(HumanStepResponse { outcome, round_result, view: s.view(ViewRole::Human) })
    })
    .await?;
    Ok(Json(resp))
}

async fn get_log(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<SessionLog> {
    let session = state.get(&id)?;
    let s = session.lock().unwrap();
    Ok(Json(SessionLog {
        session_id: id,
        settings: s.settings().clone(),
        rounds: s.logs().to_vec(),
        events: s.events().to_vec(),
    }))
}

pub async fn serve(addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router()).await
}
