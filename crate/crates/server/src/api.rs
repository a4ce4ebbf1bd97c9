//! Routes, shared state and error mapping.
//!
//! Mutating requests take the session's lock and run on a blocking task.
//! If a task outlives the job timeout the request answers `202` with a poll
//! URL; the task keeps running and its response is stored under the job id.
//! Reads never wait on the lock: they use the graph (immutable) or the view
//! published after the last mutation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use contextkg_core::context::ContextError;
use contextkg_core::graph::{GraphDocument, GraphError};
use contextkg_core::layout::arrange_ontology;
use contextkg_core::pipeline::PipelineError;
use contextkg_core::preference::PreferenceError;
use contextkg_core::distance_matrix;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use serde_json::{json, Value};
use tower_http::trace::{DefaultMakeSpan, DefaultOnResponse, TraceLayer};
use tracing::Level;

use crate::config::Config;
use crate::llm::Models;
use crate::session::{GraphSource, LoadedGraph, QueryParams, SessionError, SessionState};
use crate::store::{load_document, GraphLibrary, SnapshotStore};

/// Most nodes returned by a name search.
pub const SEARCH_LIMIT: usize = 50;

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ApiError {
    BadRequest(String),
    NotFound(String),
    Conflict(String),
    Unprocessable { message: String, log: Vec<String> },
    Internal(String),
}

impl ApiError {
    fn unprocessable(message: impl ToString) -> Self {
        ApiError::Unprocessable {
            message: message.to_string(),
            log: Vec::new(),
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Unprocessable { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    fn body(&self) -> Value {
        match self {
            ApiError::Unprocessable { message, log } if !log.is_empty() => {
                json!({"error": message, "repair_log": log})
            }
            ApiError::BadRequest(m)
            | ApiError::NotFound(m)
            | ApiError::Conflict(m)
            | ApiError::Internal(m)
            | ApiError::Unprocessable { message: m, .. } => json!({"error": m}),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(self.body())).into_response()
    }
}

fn from_preference(e: PreferenceError) -> ApiError {
    match e {
        PreferenceError::ExtractionFailed { log } => ApiError::Unprocessable {
            message: "could not extract a preference from the question".into(),
            log,
        },
        other => ApiError::unprocessable(other),
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::EmptyQuestion => ApiError::unprocessable(e),
            SessionError::NoQuery => ApiError::Conflict(e.to_string()),
            SessionError::Preference(p) | SessionError::Pipeline(PipelineError::Preference(p)) => from_preference(p),
            SessionError::Context(ContextError::UnknownBundle(b)) => ApiError::NotFound(format!("unknown bundle {b:?}")),
            SessionError::Context(c) => ApiError::unprocessable(c),
            SessionError::Pipeline(p) => ApiError::unprocessable(p),
            SessionError::Graph(g) => ApiError::BadRequest(g.to_string()),
            SessionError::SnapshotVersion(_) => ApiError::Internal(e.to_string()),
        }
    }
}

/// A finished job: status and JSON body.
#[derive(Debug, Clone)]
struct Reply {
    status: StatusCode,
    body: String,
}

impl Reply {
    fn ok(body: String) -> Self {
        Reply {
            status: StatusCode::OK,
            body,
        }
    }

    fn from_error(e: ApiError) -> Self {
        Reply {
            status: e.status(),
            body: e.body().to_string(),
        }
    }
}

impl IntoResponse for Reply {
    fn into_response(self) -> Response {
        (self.status, [(header::CONTENT_TYPE, "application/json")], self.body).into_response()
    }
}

fn to_body<T: Serialize>(value: &T) -> Result<String, ApiError> {
    serde_json::to_string(value).map_err(|e| ApiError::Internal(e.to_string()))
}

fn raw(json: String) -> Result<Box<RawValue>, ApiError> {
    RawValue::from_string(json).map_err(|e| ApiError::Internal(e.to_string()))
}

/// What reads see: refreshed after every mutation.
#[derive(Debug, Clone, Default)]
struct View {
    layout: Option<String>,
    summary: Value,
}

fn make_view(graph: &LoadedGraph, state: &SessionState) -> View {
    let s = &state.snapshot;
    View {
        layout: state.layout_json(),
        summary: json!({
            "id": s.id,
            "seed": s.seed,
            "graph": graph.name(),
            "created_ms": s.created_ms,
            "updated_ms": s.updated_ms,
            "question": s.query.as_ref().map(|q| q.params.question.clone()),
            "history": s.history,
        }),
    }
}

pub struct SessionHandle {
    pub id: String,
    pub seed: u64,
    graph: Arc<LoadedGraph>,
    state: Arc<tokio::sync::Mutex<SessionState>>,
    view: RwLock<Arc<View>>,
}

impl SessionHandle {
    fn new(graph: Arc<LoadedGraph>, state: SessionState) -> Self {
        let view = make_view(&graph, &state);
        SessionHandle {
            id: state.snapshot.id.clone(),
            seed: state.snapshot.seed,
            graph,
            state: Arc::new(tokio::sync::Mutex::new(state)),
            view: RwLock::new(Arc::new(view)),
        }
    }

    fn publish(&self, state: &SessionState) {
        *self.view.write().expect("view lock") = Arc::new(make_view(&self.graph, state));
    }

    fn view(&self) -> Arc<View> {
        self.view.read().expect("view lock").clone()
    }
}

enum Job {
    Running { session: String },
    Done { session: String, reply: Reply },
}

pub struct AppState {
    pub config: Config,
    models: Models,
    graphs: GraphLibrary,
    store: SnapshotStore,
    sessions: RwLock<HashMap<String, Arc<SessionHandle>>>,
    jobs: Mutex<HashMap<String, Job>>,
}

impl AppState {
    /// Loads the graph library and replays every stored session.
    pub async fn start(config: Config, models: Models) -> Result<Arc<Self>, StartupError> {
        let graphs = GraphLibrary::load(config.server.graph_dir.as_deref(), config.server.max_graph_bytes)?;
        let store = SnapshotStore::new(&config.server.data_dir);
        let state = Arc::new(AppState {
            config,
            models,
            graphs,
            store,
            sessions: RwLock::default(),
            jobs: Mutex::default(),
        });
        let app = state.clone();
        let restored = tokio::task::spawn_blocking(move || app.restore())
            .await
            .unwrap_or(0);
        tracing::info!(sessions = restored, "sessions restored");
        Ok(state)
    }

    fn restore(&self) -> usize {
        let mut count = 0;
        for snapshot in self.store.load_all() {
            let id = snapshot.id.clone();
            let graph = match self.resolve(&snapshot.graph) {
                Ok(g) => g,
                Err(e) => {
                    tracing::warn!(session = %id, error = ?e, "snapshot graph unavailable");
                    continue;
                }
            };
            match SessionState::replay(snapshot, &graph, &self.config) {
                Ok(state) => {
                    let handle = Arc::new(SessionHandle::new(graph, state));
                    self.sessions.write().expect("sessions lock").insert(id, handle);
                    count += 1;
                }
                Err(e) => tracing::warn!(session = %id, error = %e, "snapshot replay failed"),
            }
        }
        count
    }

    fn resolve(&self, source: &GraphSource) -> Result<Arc<LoadedGraph>, ApiError> {
        match source {
            GraphSource::Named(name) => self.graphs.get(name).ok_or_else(|| {
                let known: Vec<&str> = self.graphs.names().collect();
                ApiError::BadRequest(format!("unknown graph {name:?}; known graphs: {}", known.join(", ")))
            }),
            GraphSource::Document(doc) => load_document(source.clone(), doc)
                .map(Arc::new)
                .map_err(|e| ApiError::BadRequest(e.to_string())),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<SessionHandle>, ApiError> {
        self.sessions
            .read()
            .expect("sessions lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("unknown session {id:?}")))
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().expect("sessions lock").keys().cloned().collect();
        ids.sort();
        ids
    }
}

/// Runs `work` under the session lock on a blocking task, persists the
/// snapshot if it changed and publishes the new view.
async fn run_job<F>(app: &Arc<AppState>, handle: Arc<SessionHandle>, work: F) -> Response
where
    F: FnOnce(&mut SessionState, &LoadedGraph, &AppState) -> Result<String, ApiError> + Send + 'static,
{
    let guard = handle.state.clone().lock_owned().await;
    let task_app = app.clone();
    let task_handle = handle.clone();
    let mut task = tokio::task::spawn_blocking(move || {
        let mut state = guard;
        let before = state.snapshot.clone();
        let out = work(&mut state, &task_handle.graph, &task_app);
        if state.snapshot != before {
            if let Err(e) = task_app.store.save(&state.snapshot) {
                tracing::error!(session = %task_handle.id, error = %e, "snapshot write failed");
                return Reply::from_error(ApiError::Internal(format!("could not persist the session: {e}")));
            }
        }
        task_handle.publish(&state);
        match out {
            Ok(body) => Reply::ok(body),
            Err(e) => Reply::from_error(e),
        }
    });
    let joined = |r: Result<Reply, tokio::task::JoinError>| {
        r.unwrap_or_else(|e| Reply::from_error(ApiError::Internal(format!("job failed: {e}"))))
    };
    match tokio::time::timeout(app.config.server.job_timeout(), &mut task).await {
        Ok(r) => joined(r).into_response(),
        Err(_) => {
            let job = uuid::Uuid::new_v4().simple().to_string();
            let session = handle.id.clone();
            app.jobs.lock().expect("jobs lock").insert(
                job.clone(),
                Job::Running {
                    session: session.clone(),
                },
            );
            let poll = format!("/sessions/{session}/jobs/{job}");
            let jobs_app = app.clone();
            let job_id = job.clone();
            tokio::spawn(async move {
                let reply = joined(task.await);
                tracing::info!(job = %job_id, status = reply.status.as_u16(), "job finished");
                jobs_app
                    .jobs
                    .lock()
                    .expect("jobs lock")
                    .insert(job_id, Job::Done { session, reply });
            });
            (
                StatusCode::ACCEPTED,
                [(header::LOCATION, poll.clone())],
                Json(json!({"job": job, "status": "running", "poll": poll})),
            )
                .into_response()
        }
    }
}

// ---------------------------------------------------------------------------
// Handlers

async fn health() -> Json<Value> {
    Json(json!({"status": "ok"}))
}

async fn list_graphs(State(app): State<Arc<AppState>>) -> Json<Vec<String>> {
    Json(app.graphs.names().map(str::to_string).collect())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GraphRef {
    Name(String),
    Document(Box<GraphDocument>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    graph: Value,
    #[serde(default)]
    seed: Option<u64>,
}

async fn create_session(State(app): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("malformed request: {e}")))?;
    let source = match serde_json::from_value::<GraphRef>(req.graph)
        .map_err(|e| ApiError::BadRequest(format!("malformed graph document: {e}")))?
    {
        GraphRef::Name(n) => GraphSource::Named(n),
        GraphRef::Document(d) => GraphSource::Document(*d),
    };
    let seed = req.seed.unwrap_or_else(|| uuid::Uuid::new_v4().as_u64_pair().0);
    let task_app = app.clone();
    let handle = tokio::task::spawn_blocking(move || -> Result<Arc<SessionHandle>, ApiError> {
        let graph = task_app.resolve(&source)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let state = SessionState::new(id.clone(), seed, source);
        task_app
            .store
            .save(&state.snapshot)
            .map_err(|e| ApiError::Internal(format!("could not persist the session: {e}")))?;
        let handle = Arc::new(SessionHandle::new(graph, state));
        task_app
            .sessions
            .write()
            .expect("sessions lock")
            .insert(id, handle.clone());
        Ok(handle)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))??;
    tracing::info!(session = %handle.id, seed, graph = %handle.graph.name(), "session created");
    let body = json!({
        "id": handle.id,
        "seed": seed,
        "graph": handle.graph.name(),
        "nodes": handle.graph.kg.nodes().len(),
        "edges": handle.graph.kg.edges().len(),
    });
    Ok((
        StatusCode::CREATED,
        [(header::LOCATION, format!("/sessions/{}", handle.id))],
        Json(body),
    )
        .into_response())
}

async fn get_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    Ok(Json(app.session(&id)?.view().summary.clone()))
}

async fn get_layout(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Reply, ApiError> {
    let view = app.session(&id)?.view();
    view.layout
        .clone()
        .map(Reply::ok)
        .ok_or_else(|| ApiError::Conflict("no query has run in this session yet".into()))
}

#[derive(Serialize)]
struct QueryResponse<'a> {
    session: &'a str,
    seed: u64,
    preference: &'a contextkg_core::UserPreference,
    answers: &'a contextkg_core::pipeline::AnswerSubgraph,
    plan: &'a contextkg_core::sampling::SamplePlan,
    connected_truncated: bool,
    layout: Box<RawValue>,
}

async fn query(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let handle = app.session(&id)?;
    let params: QueryParams =
        serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("malformed request: {e}")))?;
    if params.question.trim().is_empty() {
        return Err(SessionError::EmptyQuestion.into());
    }
    if let Some(d) = params.diversity {
        if !(0.0..=1.0).contains(&d) {
            return Err(ApiError::BadRequest(format!("diversity {d} is outside [0, 1]")));
        }
    }
    Ok(run_job(&app, handle, move |state, graph, app| {
        state.run_query(graph, params, &app.config, &app.models)?;
        let view = state.view.as_ref().expect("query view");
        to_body(&QueryResponse {
            session: &state.snapshot.id,
            seed: state.snapshot.seed,
            preference: &view.preference,
            answers: &view.answers,
            plan: &view.plan,
            connected_truncated: view.connected_truncated,
            layout: raw(state.layout_json().expect("query layout"))?,
        })
    })
    .await)
}

#[derive(Deserialize)]
struct ContextBody {
    description: String,
}

async fn context(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let handle = app.session(&id)?;
    let req: ContextBody =
        serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("malformed request: {e}")))?;
    Ok(run_job(&app, handle, move |state, graph, app| {
        let directive = state.apply_context(graph, &req.description, &app.models)?;
        #[derive(Serialize)]
        struct Out<'a> {
            directive: &'a contextkg_core::ContextDirective,
            layout: Box<RawValue>,
        }
        to_body(&Out {
            directive: &directive,
            layout: raw(state.layout_json().expect("layout"))?,
        })
    })
    .await)
}

async fn expand(
    State(app): State<Arc<AppState>>,
    Path((id, bundle)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let handle = app.session(&id)?;
    Ok(run_job(&app, handle, move |state, _, _| {
        state.expand(&bundle)?;
        Ok(state.layout_json().expect("layout"))
    })
    .await)
}

async fn insights(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let handle = app.session(&id)?;
    Ok(run_job(&app, handle, move |state, graph, app| {
        let report = state.insights(graph, &app.models)?;
        to_body(&report)
    })
    .await)
}

async fn ontology(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let handle = app.session(&id)?;
    let onto = &handle.graph.ontology;
    let dm = distance_matrix(onto);
    let positions = arrange_ontology(&dm, app.config.engine.layout.spacing);
    let distances: Vec<Vec<f64>> = (0..dm.len())
        .map(|i| (0..dm.len()).map(|j| dm.get(i, j)).collect())
        .collect();
    let placed: serde_json::Map<String, Value> = dm
        .order
        .iter()
        .zip(&positions)
        .map(|(t, p)| (t.clone(), json!(p)))
        .collect();
    Ok(Json(json!({
        "types": onto.types,
        "relations": onto.relations,
        "attributes": onto.attributes,
        "edge_attributes": onto.edge_attributes,
        "order": dm.order,
        "distances": distances,
        "positions": placed,
    })))
}

#[derive(Deserialize)]
struct NodeSearch {
    #[serde(default)]
    name: String,
}

#[derive(Serialize)]
struct NodeHit<'a> {
    id: &'a str,
    label: &'a str,
    #[serde(rename = "type")]
    node_type: &'a str,
}

async fn search_nodes(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<NodeSearch>,
) -> Result<Response, ApiError> {
    let handle = app.session(&id)?;
    let needle = q.name.trim().to_lowercase();
    if needle.is_empty() {
        return Err(ApiError::BadRequest("the name parameter is empty".into()));
    }
    let hits: Vec<NodeHit> = handle
        .graph
        .kg
        .nodes()
        .iter()
        .filter(|n| n.label.to_lowercase().contains(&needle))
        .take(SEARCH_LIMIT)
        .map(|n| NodeHit {
            id: &n.id,
            label: &n.label,
            node_type: &n.node_type,
        })
        .collect();
    Ok(Json(hits).into_response())
}

async fn poll_job(
    State(app): State<Arc<AppState>>,
    Path((id, job)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let jobs = app.jobs.lock().expect("jobs lock");
    match jobs.get(&job) {
        Some(Job::Running { session }) if *session == id => Ok((
            StatusCode::ACCEPTED,
            Json(json!({"job": job, "status": "running", "poll": format!("/sessions/{id}/jobs/{job}")})),
        )
            .into_response()),
        Some(Job::Done { session, reply }) if *session == id => Ok(reply.clone().into_response()),
        _ => Err(ApiError::NotFound(format!("unknown job {job:?}"))),
    }
}

async fn fallback() -> ApiError {
    ApiError::NotFound("no such route".into())
}

pub fn router(app: Arc<AppState>) -> Router {
    let limit = app.config.server.max_graph_bytes;
    Router::new()
        .route("/health", get(health))
        .route("/graphs", get(list_graphs))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/layout", get(get_layout))
        .route("/sessions/{id}/query", post(query))
        .route("/sessions/{id}/context", post(context))
        .route("/sessions/{id}/bundles/{bundle}/expand", post(expand))
        .route("/sessions/{id}/insights", get(insights))
        .route("/sessions/{id}/ontology", get(ontology))
        .route("/sessions/{id}/nodes", get(search_nodes))
        .route("/sessions/{id}/jobs/{job}", get(poll_job))
        .fallback(fallback)
        .layer(DefaultBodyLimit::max(limit))
        .layer(
            TraceLayer::new_for_http()
                .make_span_with(DefaultMakeSpan::new().level(Level::INFO))
                .on_response(DefaultOnResponse::new().level(Level::INFO)),
        )
        .with_state(app)
}
