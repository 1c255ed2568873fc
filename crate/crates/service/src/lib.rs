// SPDX-License-Identifier: Apache-2.0

//! HTTP/JSON facade over one workspace.
//!
//! [`App::handle_request`] is a plain function from (method, path, body)
//! to a [`Response`]; [`router`] adapts it to axum. JSON bodies are the
//! canonical documents followed by a newline, byte-identical to the
//! command line's `--format canonical` output.
//!
//! Endpoints:
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/containers` | `{kind, payload, period_tag?, labels?}` -> 201 `{id}` |
//! | POST | `/associations` | `{source, target, kind}` -> 201 |
//! | POST | `/tests/{id}/winner` | `{hypothesis}` |
//! | POST | `/tests/{id}/observation` | `{observation, outcome, confidence?}`; `observation` is an id or `{payload, period_tag?, labels?}` -> 201 |
//! | GET | `/grid` | `?format=csv`, `?transpose=true` |
//! | GET | `/hypotheses/{id}/status` | |
//! | GET | `/backlog` | |
//! | GET | `/tests/{id}/report` | |
//! | GET | `/snapshot` | the `.ekb` document |
//! | POST | `/algebra/{join,restrict,project,compose}` | see [`AlgebraRequest`] |
//! | GET | `/verify` | |

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::{Body, Bytes};
use axum::extract::State;
use axum::http::{HeaderValue, Method, StatusCode, Uri};
use axum::Router;
use evident_core::algebra::{self, ComposePart};
use evident_core::canonical;
use evident_core::engine::{backlog, grid_view, hypothesis_status, knowledge_report};
use evident_core::model::{make_container_at, ContainerKind, EdgeKind, Outcome, Payload};
use evident_core::render;
use evident_core::store::{snapshot_canonical, snapshot_from_value};
use evident_core::workspace::{resolve_id, Workspace, WorkspaceWriter};
use evident_core::{ContainerId, Error, Snapshot};
use serde::Deserialize;
use serde_json::{json, Value};

pub const JSON: &str = "application/json";
pub const CSV: &str = "text/csv; charset=utf-8";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub content_type: &'static str,
    pub body: String,
}

impl Response {
    fn json(status: u16, doc: String) -> Self {
        Response { status, content_type: JSON, body: doc + "\n" }
    }

    fn empty(status: u16) -> Self {
        Response { status, content_type: JSON, body: String::new() }
    }
}

/// Error body: `{code, message, ids}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
    pub ids: Vec<ContainerId>,
}

impl ApiError {
    fn new(status: u16, code: &str, message: impl Into<String>) -> Self {
        ApiError { status, code: code.to_owned(), message: message.into(), ids: vec![] }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(400, "MalformedInput", message)
    }

    fn into_response(self) -> Response {
        let doc = json!({ "code": self.code, "message": self.message, "ids": self.ids });
        Response::json(self.status, canonical::to_string(&doc))
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let root = e.root();
        let status = match root {
            Error::UnknownId(_)
            | Error::DanglingReference(_)
            | Error::UnknownHypothesis(_)
            | Error::UnknownObservation(_) => 404,
            Error::SingleObservationViolation { .. } | Error::WinnerConflict { .. } => 409,
            Error::Io(_) => 500,
            _ => 400,
        };
        ApiError { status, code: root.code().to_owned(), message: root.to_string(), ids: root.ids() }
    }
}

type ApiResult = Result<Response, ApiError>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewContainer {
    kind: ContainerKind,
    payload: Value,
    #[serde(default)]
    period_tag: Option<String>,
    #[serde(default)]
    labels: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewAssociation {
    source: String,
    target: String,
    kind: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewWinner {
    hypothesis: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ObservationRef {
    Id(String),
    Inline {
        payload: Value,
        #[serde(default)]
        period_tag: Option<String>,
        #[serde(default)]
        labels: Vec<String>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewObservation {
    observation: ObservationRef,
    outcome: String,
    #[serde(default)]
    confidence: Option<f64>,
}

/// Body of the algebra endpoints. A missing `snapshot` means the
/// workspace; `"@"` also names the workspace.
///
/// - join: `{"snapshots": [doc | "@", ...]}`
/// - restrict: `{"snapshot"?, "rows": [id, ...]}`
/// - project: `{"snapshot"?, "cols": [id, ...]}`
/// - compose: `{"parts": [{"snapshot"?, "rows"?, "cols"?}, ...]}`
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AlgebraRequest {
    #[serde(default)]
    snapshots: Vec<Value>,
    #[serde(default)]
    snapshot: Option<Value>,
    #[serde(default)]
    rows: Option<Vec<String>>,
    #[serde(default)]
    cols: Option<Vec<String>>,
    #[serde(default)]
    parts: Vec<AlgebraRequest>,
}

/// A running service: the workspace and its (held) writer lock.
pub struct App {
    workspace: Workspace,
    writer: Mutex<WorkspaceWriter>,
}

impl App {
    /// Opens the workspace and takes its writer lock for the life of the
    /// service.
    pub fn open(dir: &Path) -> evident_core::Result<App> {
        let workspace = Workspace::open(dir)?;
        let writer = workspace.writer()?;
        Ok(App { workspace, writer: Mutex::new(writer) })
    }

    fn writer(&self) -> MutexGuard<'_, WorkspaceWriter> {
        self.writer.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Current snapshot (the latest fully applied event).
    pub fn snapshot(&self) -> Snapshot {
        self.writer().snapshot().clone()
    }

    /// Number of events in the log.
    pub fn event_count(&self) -> usize {
        self.writer().store().log().len()
    }

    pub fn handle_request(&self, method: &str, target: &str, body: &[u8]) -> Response {
        if method == "OPTIONS" {
            return Response::empty(204);
        }
        let (path, query) = target.split_once('?').unwrap_or((target, ""));
        let segments: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
        let result = match (method, segments.as_slice()) {
            ("POST", ["containers"]) => self.post_container(body),
            ("POST", ["associations"]) => self.post_association(body),
            ("POST", ["tests", id, "winner"]) => self.post_winner(id, body),
            ("POST", ["tests", id, "observation"]) => self.post_observation(id, body),
            ("GET", ["grid"]) => self.get_grid(query),
            ("GET", ["hypotheses", id, "status"]) => self.get_status(id),
            ("GET", ["backlog"]) => self.get_backlog(),
            ("GET", ["tests", id, "report"]) => self.get_report(id),
            ("GET", ["snapshot"]) => Ok(Response::json(200, snapshot_canonical(&self.snapshot()))),
            ("POST", ["algebra", op]) => self.post_algebra(op, body),
            ("GET", ["verify"]) => self.get_verify(),
            (_, route) if known_route(route) => {
                Err(ApiError::new(405, "MethodNotAllowed", format!("{method} {path} is not supported")))
            }
            _ => Err(ApiError::new(404, "NotFound", format!("no route for {path}"))),
        };
        result.unwrap_or_else(ApiError::into_response)
    }

    fn post_container(&self, body: &[u8]) -> ApiResult {
        let req: NewContainer = parse_body(body)?;
        let payload = Payload::from_value(req.payload)?;
        let id = self.writer().add_container(req.kind, payload, req.period_tag, req.labels)?;
        Ok(Response::json(201, canonical::to_string(&json!({ "id": id }))))
    }

    fn post_association(&self, body: &[u8]) -> ApiResult {
        let req: NewAssociation = parse_body(body)?;
        let kind: EdgeKind = req.kind.parse().map_err(|_| ApiError::bad_request(format!("unknown edge kind {:?}", req.kind)))?;
        let mut w = self.writer();
        let source = resolve_id(w.snapshot(), &req.source)?;
        let target = resolve_id(w.snapshot(), &req.target)?;
        w.link(source.clone(), target.clone(), kind)?;
        let doc = json!({ "source": source, "target": target, "kind": kind });
        Ok(Response::json(201, canonical::to_string(&doc)))
    }

    fn post_winner(&self, test: &str, body: &[u8]) -> ApiResult {
        let req: NewWinner = parse_body(body)?;
        let mut w = self.writer();
        let test = resolve_id(w.snapshot(), test)?;
        let hypothesis = resolve_id(w.snapshot(), &req.hypothesis)?;
        w.set_winner(test.clone(), hypothesis.clone())?;
        Ok(Response::json(200, canonical::to_string(&json!({ "test": test, "hypothesis": hypothesis }))))
    }

    fn post_observation(&self, test: &str, body: &[u8]) -> ApiResult {
        let req: NewObservation = parse_body(body)?;
        let outcome: Outcome = req.outcome.parse()?;
        let mut w = self.writer();
        let test = resolve_id(w.snapshot(), test)?;
        let (observation, inline) = match req.observation {
            ObservationRef::Id(id) => (resolve_id(w.snapshot(), &id)?, None),
            ObservationRef::Inline { payload, period_tag, labels } => {
                let payload = Payload::from_value(payload)?;
                let c = make_container_at(ContainerKind::Observation, payload, period_tag, labels, w.next_created_at())?;
                // Already registered: refer to it instead of re-adding.
                if w.snapshot().contains(&c.id) {
                    (c.id, None)
                } else {
                    (c.id.clone(), Some(c))
                }
            }
        };
        let successor = w.promote(test.clone(), observation.clone(), outcome, req.confidence, inline)?;
        let doc = json!({ "test": test, "observation": observation, "successor": successor });
        Ok(Response::json(201, canonical::to_string(&doc)))
    }

    fn get_grid(&self, query: &str) -> ApiResult {
        let snap = self.snapshot();
        let mut grid = grid_view(&snap);
        let mut csv = false;
        for pair in query.split('&').filter(|p| !p.is_empty()) {
            match pair.split_once('=').unwrap_or((pair, "")) {
                ("format", "csv") => csv = true,
                ("format", "canonical" | "json") => csv = false,
                ("transpose", "true" | "1" | "") => grid = algebra::permute(&grid),
                ("transpose", "false" | "0") => {}
                _ => return Err(ApiError::bad_request(format!("unsupported query parameter {pair:?}"))),
            }
        }
        Ok(if csv {
            Response { status: 200, content_type: CSV, body: render::grid_csv(&snap, &grid) }
        } else {
            Response::json(200, render::grid_canonical(&snap, &grid))
        })
    }

    fn get_status(&self, id: &str) -> ApiResult {
        let snap = self.snapshot();
        let summary = hypothesis_status(&snap, &resolve_id(&snap, id)?)?;
        Ok(Response::json(200, render::status_canonical(&summary)))
    }

    fn get_backlog(&self) -> ApiResult {
        Ok(Response::json(200, render::backlog_canonical(&backlog(&self.snapshot()))))
    }

    fn get_report(&self, id: &str) -> ApiResult {
        let snap = self.snapshot();
        let report = knowledge_report(&snap, &resolve_id(&snap, id)?)?;
        Ok(Response::json(200, render::report_canonical(&report)))
    }

    fn get_verify(&self) -> ApiResult {
        Ok(Response::json(200, render::verify_canonical(&self.workspace.verify()?)))
    }

    fn source(&self, doc: Option<&Value>) -> Result<Snapshot, ApiError> {
        match doc {
            None => Ok(self.snapshot()),
            Some(Value::String(s)) if s == "@" => Ok(self.snapshot()),
            Some(v) => Ok(snapshot_from_value(v)?),
        }
    }

    fn post_algebra(&self, op: &str, body: &[u8]) -> ApiResult {
        let req: AlgebraRequest = if body.iter().all(u8::is_ascii_whitespace) { AlgebraRequest::default() } else { parse_body(body)? };
        let result = match op {
            "join" => {
                let mut acc = Snapshot::new();
                for doc in &req.snapshots {
                    acc = algebra::join(&acc, &self.source(Some(doc))?)?;
                }
                acc
            }
            "restrict" => {
                let snap = self.source(req.snapshot.as_ref())?;
                let rows = resolve_all(&snap, req.rows.as_deref().unwrap_or_default())?;
                algebra::restrict(&snap, &rows)?
            }
            "project" => {
                let snap = self.source(req.snapshot.as_ref())?;
                let cols = resolve_all(&snap, req.cols.as_deref().unwrap_or_default())?;
                algebra::project(&snap, &cols)?
            }
            "compose" => {
                let mut parts = Vec::new();
                for p in &req.parts {
                    let snapshot = self.source(p.snapshot.as_ref())?;
                    let rows = p.rows.as_deref().map(|r| resolve_all(&snapshot, r)).transpose()?;
                    let cols = p.cols.as_deref().map(|c| resolve_all(&snapshot, c)).transpose()?;
                    parts.push(ComposePart { snapshot, rows, cols });
                }
                algebra::compose(&parts)?
            }
            _ => return Err(ApiError::new(404, "NotFound", format!("unknown algebra operation {op:?}"))),
        };
        Ok(Response::json(200, snapshot_canonical(&result)))
    }
}

fn known_route(segments: &[&str]) -> bool {
    matches!(
        segments,
        ["containers"]
            | ["associations"]
            | ["tests", _, "winner" | "observation" | "report"]
            | ["grid"]
            | ["hypotheses", _, "status"]
            | ["backlog"]
            | ["snapshot"]
            | ["algebra", _]
            | ["verify"]
    )
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("request body: {e}")))
}

fn resolve_all(snap: &Snapshot, ids: &[String]) -> Result<BTreeSet<ContainerId>, ApiError> {
    ids.iter().map(|s| resolve_id(snap, s).map_err(ApiError::from)).collect()
}

/// CORS headers added to every response.
#[derive(Clone, Debug)]
pub struct Cors {
    pub origin: String,
}

impl Default for Cors {
    fn default() -> Self {
        Cors { origin: "*".into() }
    }
}

#[derive(Clone)]
struct Shared {
    app: Arc<App>,
    cors: Cors,
}

/// Axum router dispatching every request to [`App::handle_request`].
pub fn router(app: Arc<App>, cors: Cors) -> Router {
    Router::new().fallback(dispatch).with_state(Shared { app, cors })
}

async fn dispatch(State(shared): State<Shared>, method: Method, uri: Uri, body: Bytes) -> axum::response::Response {
    let target = uri.path_and_query().map(|p| p.as_str().to_owned()).unwrap_or_else(|| uri.path().to_owned());
    let app = shared.app.clone();
    let response = tokio::task::spawn_blocking(move || app.handle_request(method.as_str(), &target, &body))
        .await
        .unwrap_or_else(|_| ApiError::new(500, "Internal", "request handler panicked").into_response());
    let mut out = axum::response::Response::new(Body::from(response.body));
    *out.status_mut() = StatusCode::from_u16(response.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    let headers = out.headers_mut();
    if response.status != 204 {
        headers.insert("content-type", HeaderValue::from_static(response.content_type));
    }
    if let Ok(origin) = HeaderValue::from_str(&shared.cors.origin) {
        headers.insert("access-control-allow-origin", origin);
    }
    headers.insert("access-control-allow-methods", HeaderValue::from_static("GET, POST, OPTIONS"));
    headers.insert("access-control-allow-headers", HeaderValue::from_static("content-type"));
    out
}
