//! HTTP API over flex sessions.
//!
//! A session is an uploaded graph plus its current configuration. Each one
//! sits behind its own async mutex; a request that finds it locked gets
//! `409 Conflict` instead of queueing. Sessions are written to
//! `state_dir/<id>/` (`initial.msg`, `current.msg`, `meta.json`) after
//! every change and reloaded from there on demand.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{FromRequest, Path as UrlPath, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use matchstick::flexer::{flex_step, monitor_value, steer_to_event, FlexOptions, FlexState, Monitor};
use matchstick::ingest::{read_msg, write_msg};
use matchstick::rigidity::{analyze, flex_space, pebble_game_2_3, Classification, RigidityWarning};
use matchstick::verifier::{verify_matchstick, VerificationCertificate};
use matchstick::{Embedding, Graph, ToleranceProfile};
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex, OwnedMutexGuard};

use crate::input::{ensure_refined, inferred_profile, CliError};

pub struct Session {
    graph: Graph,
    names: Vec<(usize, String)>,
    initial: Embedding,
    state: FlexState,
    /// Last oriented direction used for each flex mode, so repeated steps
    /// along "mode k" keep going the same way.
    mode_reference: Option<(usize, Vec<f64>)>,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    arclength: f64,
    #[serde(default)]
    mode_reference: Option<(usize, Vec<f64>)>,
}

pub struct AppState {
    state_dir: PathBuf,
    sessions: std::sync::Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

impl AppState {
    pub fn new(state_dir: impl Into<PathBuf>) -> std::io::Result<Arc<Self>> {
        let state_dir = state_dir.into();
        std::fs::create_dir_all(&state_dir)?;
        Ok(Arc::new(Self {
            state_dir,
            sessions: std::sync::Mutex::new(HashMap::new()),
        }))
    }

    fn session_dir(&self, id: &str) -> PathBuf {
        self.state_dir.join(id)
    }

    fn lookup(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        // Ids are UUIDs; anything else never names a directory.
        if uuid::Uuid::parse_str(id).is_err() {
            return Err(ApiError::not_found(id));
        }
        let mut map = self.sessions.lock().expect("session map poisoned");
        if let Some(s) = map.get(id) {
            return Ok(s.clone());
        }
        let session = load_session(&self.session_dir(id)).ok_or_else(|| ApiError::not_found(id))?;
        let s = Arc::new(Mutex::new(session));
        map.insert(id.to_string(), s.clone());
        Ok(s)
    }

    /// Exclusive access to a session, waiting if necessary. Requests made
    /// while the guard is held are answered with 409.
    pub async fn acquire(&self, id: &str) -> Option<OwnedMutexGuard<Session>> {
        let s = self.lookup(id).ok()?;
        Some(s.lock_owned().await)
    }

    fn try_acquire(&self, id: &str) -> Result<OwnedMutexGuard<Session>, ApiError> {
        self.lookup(id)?
            .try_lock_owned()
            .map_err(|_| ApiError::new(StatusCode::CONFLICT, "session is busy with another request"))
    }

    fn persist(&self, id: &str, s: &Session) -> Result<(), ApiError> {
        let dir = self.session_dir(id);
        let io = |e: std::io::Error| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("persisting session: {e}"));
        std::fs::create_dir_all(&dir).map_err(io)?;
        std::fs::write(dir.join("initial.msg"), write_msg(&s.graph, &s.initial, &s.names)).map_err(io)?;
        std::fs::write(dir.join("current.msg"), write_msg(&s.graph, &s.state.embedding, &s.names)).map_err(io)?;
        let meta = Meta {
            arclength: s.state.arclength,
            mode_reference: s.mode_reference.clone(),
        };
        let text = serde_json::to_string(&meta).expect("meta serializes");
        std::fs::write(dir.join("meta.json"), text).map_err(io)
    }
}

fn load_session(dir: &Path) -> Option<Session> {
    let initial = read_msg(&std::fs::read_to_string(dir.join("initial.msg")).ok()?).ok()?;
    let current = read_msg(&std::fs::read_to_string(dir.join("current.msg")).ok()?).ok()?;
    let meta: Meta = serde_json::from_str(&std::fs::read_to_string(dir.join("meta.json")).ok()?).ok()?;
    if current.graph != initial.graph {
        return None;
    }
    let mut state = FlexState::new(current.embedding);
    state.arclength = meta.arclength;
    Some(Session {
        graph: initial.graph,
        names: initial.names,
        initial: initial.embedding,
        state,
        mode_reference: meta.mode_reference,
    })
}

// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no session {id:?}"))
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl From<matchstick::Error> for ApiError {
    fn from(e: matchstick::Error) -> Self {
        let cli = CliError::from(e);
        let status = if cli.code == 2 {
            StatusCode::BAD_REQUEST
        } else {
            StatusCode::UNPROCESSABLE_ENTITY
        };
        Self::new(status, cli.message)
    }
}

impl From<CliError> for ApiError {
    fn from(e: CliError) -> Self {
        let status = if e.code == 2 {
            StatusCode::BAD_REQUEST
        } else {
            StatusCode::UNPROCESSABLE_ENTITY
        };
        Self::new(status, e.message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Body(serde_json::json!({ "error": self.message }))).into_response()
    }
}

/// A JSON response written with full float precision.
pub struct Body<T>(pub T);

impl<T: Serialize> IntoResponse for Body<T> {
    fn into_response(self) -> Response {
        match crate::json::to_string(&self.0) {
            Ok(text) => ([(header::CONTENT_TYPE, "application/json")], text).into_response(),
            Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
        }
    }
}

/// JSON request body; malformed bodies are a 400 like any other bad input.
pub struct JsonIn<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for JsonIn<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| JsonIn(v))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

type ApiResult<T> = Result<Body<T>, ApiError>;

// ---------------------------------------------------------------------------
// Request and response bodies.

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    pub msg_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateResponse {
    pub session_id: String,
    pub n_vertices: usize,
    pub n_edges: usize,
    /// Whether the uploaded coordinates were refined to unit length.
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphResponse {
    pub vertices: Vec<[f64; 2]>,
    pub edges: Vec<[usize; 2]>,
    pub markers: BTreeMap<String, usize>,
    pub arclength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigiditySummary {
    pub classification: Classification,
    pub dof: usize,
    pub rank: usize,
    pub generic_dof: usize,
    pub gap_ratio: Option<f64>,
    pub warnings: Vec<RigidityWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportResponse {
    pub verification: VerificationCertificate,
    pub rigidity: RigiditySummary,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexModesResponse {
    pub modes: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
pub struct StepRequest {
    #[serde(default)]
    pub mode_index: Option<usize>,
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinatesResponse {
    pub vertices: Vec<[f64; 2]>,
    pub max_residual: f64,
    pub arclength: f64,
}

/// A vertex id or a vertex name from the MSG file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum VertexRef {
    Id(usize),
    Name(String),
}

#[derive(Debug, Deserialize)]
pub struct SteerRequest {
    pub a: VertexRef,
    pub b: VertexRef,
    pub target: f64,
    #[serde(default)]
    pub step_init: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub arclength: f64,
    pub monitor: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteerResponse {
    pub steps: usize,
    pub arclength: f64,
    pub monitor: f64,
    pub target: f64,
    pub max_residual: f64,
    pub crossing_ok: Option<bool>,
    pub trace: Vec<TraceRow>,
    pub vertices: Vec<[f64; 2]>,
}

fn coords(emb: &Embedding) -> Vec<[f64; 2]> {
    emb.positions().iter().map(|p| [p.x, p.y]).collect()
}

fn coordinates(s: &Session) -> CoordinatesResponse {
    CoordinatesResponse {
        vertices: coords(&s.state.embedding),
        max_residual: s.state.embedding.max_abs_length_deviation(&s.graph),
        arclength: s.state.arclength,
    }
}

impl Session {
    fn vertex(&self, r: &VertexRef) -> Result<usize, ApiError> {
        let v = match r {
            VertexRef::Id(v) => *v,
            VertexRef::Name(n) => self
                .names
                .iter()
                .find(|(_, m)| m == n)
                .map(|&(v, _)| v)
                .ok_or_else(|| ApiError::bad_request(format!("no vertex named {n:?}")))?,
        };
        if v >= self.graph.n_vertices() {
            return Err(ApiError::bad_request(format!("vertex {v} out of range")));
        }
        Ok(v)
    }
}

/// Run CPU-heavy work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

// ---------------------------------------------------------------------------
// Handlers.

async fn create(State(app): State<Arc<AppState>>, JsonIn(req): JsonIn<CreateRequest>) -> Result<(StatusCode, Body<CreateResponse>), ApiError> {
    let doc = read_msg(&req.msg_text)?;
    let (doc, embedding, refinement) = blocking(move || {
        let (e, r) = ensure_refined(&doc.graph, &doc.embedding)?;
        Ok((doc, e, r))
    })
    .await?;
    let id = uuid::Uuid::new_v4().to_string();
    let session = Session {
        names: doc.names,
        initial: embedding.clone(),
        state: FlexState::new(embedding),
        mode_reference: None,
        graph: doc.graph,
    };
    app.persist(&id, &session)?;
    let resp = CreateResponse {
        session_id: id.clone(),
        n_vertices: session.graph.n_vertices(),
        n_edges: session.graph.n_edges(),
        refined: refinement.is_some(),
    };
    app.sessions
        .lock()
        .expect("session map poisoned")
        .insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Body(resp)))
}

async fn graph(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<GraphResponse> {
    let s = app.try_acquire(&id)?;
    Ok(Body(GraphResponse {
        vertices: coords(&s.state.embedding),
        edges: s.graph.edges().iter().map(|&(a, b)| [a, b]).collect(),
        markers: s.names.iter().map(|(v, n)| (n.clone(), *v)).collect(),
        arclength: s.state.arclength,
    }))
}

async fn report(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<ReportResponse> {
    let s = app.try_acquire(&id)?;
    blocking(move || {
        let tol = ToleranceProfile::default();
        let (g, emb) = (&s.graph, &s.state.embedding);
        let (m, n) = inferred_profile(g);
        let verification = verify_matchstick(g, emb, m, n, &tol, tol.eps_refined)?;
        let r = analyze(g, emb, &tol)?;
        Ok(Body(ReportResponse {
            verification,
            rigidity: RigiditySummary {
                classification: r.classification,
                dof: r.internal_dof,
                rank: r.rank,
                generic_dof: pebble_game_2_3(g).generic_dof,
                gap_ratio: r.gap_ratio.is_finite().then_some(r.gap_ratio),
                warnings: r.warnings,
            },
            max_residual: emb.max_abs_length_deviation(g),
        }))
    })
    .await
}

async fn flexmodes(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<FlexModesResponse> {
    let s = app.try_acquire(&id)?;
    blocking(move || {
        let basis = flex_space(&s.graph, &s.state.embedding, ToleranceProfile::default().rank_tau)?;
        Ok(Body(FlexModesResponse {
            modes: basis.column_iter().map(|c| c.iter().copied().collect()).collect(),
        }))
    })
    .await
}

async fn step(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    JsonIn(req): JsonIn<StepRequest>,
) -> ApiResult<CoordinatesResponse> {
    if !req.h.is_finite() {
        return Err(ApiError::bad_request("h must be finite"));
    }
    let mut s = app.try_acquire(&id)?;
    let app2 = app.clone();
    blocking(move || {
        let opts = FlexOptions::default();
        let (direction, reference) = match (req.mode_index, req.direction) {
            (Some(k), None) => {
                let basis = flex_space(&s.graph, &s.state.embedding, opts.rank_tau)?;
                if basis.ncols() == 0 {
                    return Err(matchstick::Error::NoFlex.into());
                }
                if k >= basis.ncols() {
                    return Err(ApiError::bad_request(format!("mode {k} requested; {} available", basis.ncols())));
                }
                let mut d: Vec<f64> = basis.column(k).iter().copied().collect();
                if let Some((j, r)) = &s.mode_reference {
                    if *j == k && d.iter().zip(r).map(|(x, y)| x * y).sum::<f64>() < 0.0 {
                        d.iter_mut().for_each(|x| *x = -*x);
                    }
                }
                (d.clone(), Some((k, d)))
            }
            (None, Some(d)) => (d, None),
            _ => return Err(ApiError::bad_request("give exactly one of mode_index and direction")),
        };
        let next = flex_step(&s.graph, &s.state, &direction, req.h, &opts)?;
        s.state = next;
        if reference.is_some() {
            s.mode_reference = reference;
        }
        app2.persist(&id, &s)?;
        Ok(Body(coordinates(&s)))
    })
    .await
}

async fn steer(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    JsonIn(req): JsonIn<SteerRequest>,
) -> ApiResult<SteerResponse> {
    let mut s = app.try_acquire(&id)?;
    let app2 = app.clone();
    blocking(move || {
        let (a, b) = (s.vertex(&req.a)?, s.vertex(&req.b)?);
        let monitor = Monitor { a, b, target: req.target };
        let mut opts = FlexOptions::default();
        if let Some(h) = req.step_init {
            opts.step_init = h;
        }
        let (next, trace) = steer_to_event(&s.graph, &s.state, &monitor, &opts)?;
        let crossing_ok = trace.last().and_then(|t| t.crossing_ok);
        s.state = next;
        app2.persist(&id, &s)?;
        Ok(Body(SteerResponse {
            steps: trace.len() - 1,
            arclength: s.state.arclength,
            monitor: monitor_value(&s.state.embedding, &monitor),
            target: monitor.target,
            max_residual: s.state.embedding.max_abs_length_deviation(&s.graph),
            crossing_ok,
            trace: trace
                .iter()
                .map(|t| TraceRow {
                    step: t.step,
                    arclength: t.arclength,
                    monitor: t.monitor,
                    max_residual: t.max_residual,
                })
                .collect(),
            vertices: coords(&s.state.embedding),
        }))
    })
    .await
}

async fn reset(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<CoordinatesResponse> {
    let mut s = app.try_acquire(&id)?;
    s.state = FlexState::new(s.initial.clone());
    s.mode_reference = None;
    app.persist(&id, &s)?;
    Ok(Body(coordinates(&s)))
}

pub fn router(app: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/graph", get(graph))
        .route("/sessions/{id}/report", get(report))
        .route("/sessions/{id}/flexmodes", get(flexmodes))
        .route("/sessions/{id}/step", post(step))
        .route("/sessions/{id}/steer", post(steer))
        .route("/sessions/{id}/reset", post(reset))
        .with_state(app)
}

pub async fn serve(port: u16, state_dir: PathBuf) -> std::io::Result<()> {
    let app = AppState::new(state_dir)?;
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
        .await
        .map_err(|e| std::io::Error::new(e.kind(), format!("cannot listen on port {port}: {e}")))?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(app)).await
}
