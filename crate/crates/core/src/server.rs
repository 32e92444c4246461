// SPDX-License-Identifier: Apache-2.0

//! Session HTTP API.
//!
//! Each session holds an immutable snapshot behind an `Arc`. Readers clone
//! the current snapshot and never wait on each other; mutations take the
//! session's writer lock, build a new snapshot and swap it in.

use std::collections::{BTreeSet, HashMap};
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::export::WarningExport;
use crate::graph::{GraphDocument, GraphError, NodeId};
use crate::grouping::{GroupError, GroupKind, GroupSpec};
use crate::query::{edges_of, search, QueryError, SearchKind};
use crate::session::{Session, SessionError, SessionFile};
use crate::svg::render_svg;

/// An error response: a status code and a message sent as `{"error": ...}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub current_revision: Option<u64>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into(), current_revision: None }
    }

    fn not_found(what: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, what)
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::Malformed(_) | SessionError::Graph(_) => StatusCode::BAD_REQUEST,
            SessionError::Group(_) => StatusCode::UNPROCESSABLE_ENTITY,
            SessionError::Query(q) => return q.clone().into(),
            SessionError::StaleRevision { current, .. } => {
                return ApiError { status: StatusCode::CONFLICT, message: e.to_string(), current_revision: Some(*current) };
            }
            SessionError::NotVisible(_) => StatusCode::NOT_FOUND,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let status = match e {
            QueryError::UnknownNode(_) | QueryError::UnknownMethod(_) => StatusCode::NOT_FOUND,
            QueryError::BadNumber(_) | QueryError::UnknownKind(_) => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, e.to_string())
    }
}

impl From<GroupError> for ApiError {
    fn from(e: GroupError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = match self.current_revision {
            Some(r) => json!({ "error": self.message, "revision": r }),
            None => json!({ "error": self.message }),
        };
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

struct Slot {
    writer: Mutex<()>,
    current: RwLock<Arc<Session>>,
}

impl Slot {
    fn snapshot(&self) -> Arc<Session> {
        self.current.read().unwrap_or_else(|p| p.into_inner()).clone()
    }

    /// Applies `f` to the current snapshot under the writer lock, after
    /// checking the caller's revision.
    fn mutate(
        &self,
        revision: Option<u64>,
        f: impl FnOnce(&Session) -> Result<Session, SessionError>,
    ) -> Result<Arc<Session>, SessionError> {
        let _guard = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let current = self.snapshot();
        current.check_revision(revision)?;
        let next = Arc::new(f(&current)?);
        *self.current.write().unwrap_or_else(|p| p.into_inner()) = next.clone();
        Ok(next)
    }
}

/// Shared server state: the open sessions.
#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Slot>>>>,
}

impl AppState {
    pub fn new() -> Self {
        AppState::default()
    }

    fn slot(&self, id: &str) -> ApiResult<Arc<Slot>> {
        let sessions = self.sessions.read().unwrap_or_else(|p| p.into_inner());
        sessions.get(id).cloned().ok_or_else(|| ApiError::not_found(format!("unknown session {id:?}")))
    }

    fn insert(&self, build: impl FnOnce(String) -> Result<Session, SessionError>) -> ApiResult<Arc<Session>> {
        let mut id = format!("{:016x}", rand::random::<u64>());
        {
            let sessions = self.sessions.read().unwrap_or_else(|p| p.into_inner());
            while sessions.contains_key(&id) {
                id = format!("{:016x}", rand::random::<u64>());
            }
        }
        let session = Arc::new(build(id.clone())?);
        let slot = Arc::new(Slot { writer: Mutex::new(()), current: RwLock::new(session.clone()) });
        self.sessions.write().unwrap_or_else(|p| p.into_inner()).insert(id, slot);
        Ok(session)
    }
}

/// The API routes over a fresh state.
pub fn router() -> Router {
    router_with(AppState::new())
}

pub fn router_with(state: AppState) -> Router {
    Router::new()
        .route("/session", post(create_session))
        .route("/session/load", post(load_session))
        .route("/session/{id}", get(save_session))
        .route("/session/{id}/layout", get(layout))
        .route("/session/{id}/svg", get(svg))
        .route("/session/{id}/collapse", post(collapse))
        .route("/session/{id}/expand", post(expand))
        .route("/session/{id}/search", get(search_nodes))
        .route("/session/{id}/node/{nid}", get(node))
        .route("/session/{id}/code/{method}", get(code))
        .route("/session/{id}/select", post(select))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router()).await
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("malformed request: {e}")))
}

#[derive(Serialize)]
struct Created {
    id: String,
    revision: u64,
    warnings: Vec<WarningExport>,
}

fn created(s: &Session) -> Response {
    let body = Created {
        id: s.id.clone(),
        revision: s.revision,
        warnings: s.warnings.iter().map(WarningExport::from).collect(),
    };
    (StatusCode::CREATED, Json(body)).into_response()
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let doc = GraphDocument::parse(&body)?;
    let session = state.insert(|id| Session::create(id, doc))?;
    Ok(created(&session))
}

async fn load_session(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let file = SessionFile::parse(&body)?;
    let session = state.insert(|id| Session::restore(id, file))?;
    Ok(created(&session))
}

async fn save_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionFile>> {
    Ok(Json(state.slot(&id)?.snapshot().save()))
}

async fn layout(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let json = state.slot(&id)?.snapshot().export().to_json();
    Ok(([(header::CONTENT_TYPE, "application/json")], json).into_response())
}

async fn svg(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let svg = render_svg(&state.slot(&id)?.snapshot().export());
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}

/// Body of collapse and expand requests: a group spec plus the revision the
/// client last saw.
#[derive(Deserialize)]
struct GroupRequest {
    #[serde(default)]
    kind: Option<GroupKind>,
    members: BTreeSet<NodeId>,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    comment: Option<String>,
    #[serde(default)]
    revision: Option<u64>,
}

impl GroupRequest {
    fn spec(self) -> (GroupSpec, Option<u64>) {
        let spec = GroupSpec {
            kind: self.kind.unwrap_or(GroupKind::User),
            members: self.members,
            label: self.label.unwrap_or_else(|| "group".to_string()),
            comment: self.comment,
        };
        (spec, self.revision)
    }
}

#[derive(Serialize)]
struct Revision {
    revision: u64,
}

async fn collapse(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Revision>> {
    let slot = state.slot(&id)?;
    let (spec, revision) = parse_body::<GroupRequest>(&body)?.spec();
    let next = slot.mutate(revision, |s| s.collapse(spec))?;
    Ok(Json(Revision { revision: next.revision }))
}

async fn expand(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Revision>> {
    let slot = state.slot(&id)?;
    let (spec, revision) = parse_body::<GroupRequest>(&body)?.spec();
    let next = slot.mutate(revision, |s| s.expand(&spec))?;
    Ok(Json(Revision { revision: next.revision }))
}

#[derive(Deserialize)]
struct SearchParams {
    kind: String,
    q: String,
}

#[derive(Serialize)]
struct Hit {
    id: NodeId,
    label: String,
    sfr: u32,
}

async fn search_nodes(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<SearchParams>,
) -> ApiResult<Response> {
    let s = state.slot(&id)?.snapshot();
    let kind: SearchKind = params.kind.parse()?;
    let g = s.rendered.graph();
    let hits: Vec<Hit> = search(g, &s.rendered.sfr, kind, &params.q)?
        .into_iter()
        .map(|n| Hit {
            id: n,
            label: g.node(n).unwrap().instruction_text.clone(),
            sfr: s.rendered.sfr.number(n).unwrap(),
        })
        .collect();
    Ok(Json(json!({ "kind": kind, "q": params.q, "results": hits, "revision": s.revision })).into_response())
}

#[derive(Serialize)]
struct NodePanel {
    collapsed: bool,
    id: NodeId,
    incoming: Vec<NodeId>,
    index: u32,
    label: String,
    line: Option<u32>,
    library: bool,
    members: Vec<NodeId>,
    method: String,
    outgoing: Vec<NodeId>,
    score: u32,
    sfr: Option<u32>,
    unreachable: bool,
}

async fn node(State(state): State<AppState>, Path((id, nid)): Path<(String, String)>) -> ApiResult<Json<NodePanel>> {
    let s = state.slot(&id)?.snapshot();
    let nid = nid
        .parse::<u64>()
        .map(NodeId)
        .map_err(|_| ApiError::not_found(format!("unknown node {nid:?}")))?;
    let r = &s.rendered;
    let g = r.graph();
    let n = g.node(nid).ok_or_else(|| ApiError::not_found(format!("unknown node {nid}")))?;
    let edges = edges_of(g, &r.sfr, nid)?;
    let collapsed = r.visible.is_collapsed(nid);
    Ok(Json(NodePanel {
        collapsed,
        id: nid,
        incoming: edges.incoming,
        index: n.instruction_index,
        label: n.instruction_text.clone(),
        line: n.source_line,
        library: n.is_library,
        members: if collapsed { r.visible.expand(nid) } else { Vec::new() },
        method: n.method_id.clone(),
        outgoing: edges.outgoing,
        score: r.scores.score(nid).unwrap_or(0),
        sfr: r.sfr.number(nid),
        unreachable: edges.unreachable,
    }))
}

async fn code(State(state): State<AppState>, Path((id, method)): Path<(String, String)>) -> ApiResult<Response> {
    let s = state.slot(&id)?.snapshot();
    let listing = s.graph.listing(&method).ok_or(QueryError::UnknownMethod(method.clone()))?;
    let highlight: Vec<u32> = s.selection.lines.get(&method).map(|l| l.iter().copied().collect()).unwrap_or_default();
    Ok(Json(json!({ "highlight": highlight, "lines": listing, "method": method, "revision": s.revision })).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectRequest {
    #[serde(default)]
    nodes: Option<BTreeSet<NodeId>>,
    #[serde(default)]
    method: Option<String>,
    #[serde(default)]
    lines: Option<BTreeSet<u32>>,
    #[serde(default)]
    revision: Option<u64>,
}

async fn select(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let slot = state.slot(&id)?;
    let req: SelectRequest = parse_body(&body)?;
    let next = match (req.nodes, req.method) {
        (Some(nodes), None) if req.lines.is_none() => slot.mutate(req.revision, |s| s.select_nodes(nodes))?,
        (None, Some(method)) => {
            let lines = req.lines.unwrap_or_default();
            slot.mutate(req.revision, |s| s.select_lines(&method, &lines))?
        }
        _ => {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "select takes either \"nodes\" or \"method\" with \"lines\""))
        }
    };
    Ok(Json(json!({ "lines": next.selection.lines, "nodes": next.selection.nodes, "revision": next.revision })).into_response())
}
