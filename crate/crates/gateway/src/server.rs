//! HTTP+JSON session service.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Body;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use brics_core::{
    conditional_activity, editor_rects_with_activity, extract_block, fold_spans, mark_errors, overview_model,
    render_svg, ActivityMap, Edit, GrammarSet, OverviewParams, Palette, Session, Snapshot,
};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::api::ApiError;

/// Grammars plus the open sessions, shared by all handlers.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    grammars: GrammarSet,
    palette: Palette,
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    next_id: AtomicU64,
}

impl AppState {
    pub fn new(grammars: GrammarSet) -> AppState {
        AppState {
            inner: Arc::new(Inner {
                grammars,
                palette: Palette::default(),
                sessions: RwLock::new(HashMap::new()),
                next_id: AtomicU64::new(1),
            }),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.inner
            .sessions
            .read()
            .expect("sessions lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("no session {id:?}")))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/edits", post(post_edit))
        .route("/sessions/{id}/rects", get(get_rects))
        .route("/sessions/{id}/overview", get(get_overview))
        .route("/sessions/{id}/refactor/extract", post(post_extract))
        .route("/sessions/{id}/events", get(get_events))
        .route("/sessions/{id}/render.svg", get(get_svg))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v).map_err(|e| ApiError::bad_request(e.body_text()))
}

fn snapshot_json(snap: &Snapshot) -> Value {
    json!({
        "version": snap.version,
        "digest": snap.digest,
        "tree": snap.tree,
        "diagnostics": snap.diagnostics,
    })
}

/// `A,B` style symbol list; `None` when the parameter is absent.
fn activity_for(snap: &Snapshot, defines: Option<&str>) -> Option<ActivityMap> {
    defines.map(|d| {
        let defs: BTreeSet<String> = d.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
        conditional_activity(&snap.tree, &defs)
    })
}

#[derive(Deserialize)]
struct CreateSession {
    text: String,
    grammar: String,
}

async fn create_session(
    State(state): State<AppState>,
    payload: Result<Json<CreateSession>, JsonRejection>,
) -> Result<Response, ApiError> {
    let req = body(payload)?;
    let grammar = state
        .inner
        .grammars
        .get(&req.grammar)
        .map_err(|e| ApiError::unprocessable(e.code(), e.to_string()))?;
    let session = Arc::new(Session::open(req.text, grammar));
    let id = format!("s{}", state.inner.next_id.fetch_add(1, Ordering::Relaxed));
    let snap = session.snapshot();
    state
        .inner
        .sessions
        .write()
        .expect("sessions lock")
        .insert(id.clone(), session);
    let mut out = snapshot_json(&snap);
    out["session_id"] = json!(id);
    Ok((StatusCode::CREATED, Json(out)).into_response())
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let session = state.session(&id)?;
    let snap = session.snapshot();
    let mut out = snapshot_json(&snap);
    out["session_id"] = json!(id);
    out["grammar"] = json!(session.grammar().name);
    out["text"] = json!(snap.text());
    Ok(Json(out))
}

async fn post_edit(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<Edit>, JsonRejection>,
) -> Result<Json<Value>, ApiError> {
    let session = state.session(&id)?;
    let edit = body(payload)?;
    let snap = session.apply_edit(&edit)?;
    Ok(Json(snapshot_json(&snap)))
}

#[derive(Deserialize)]
struct RectsQuery {
    defines: Option<String>,
}

async fn get_rects(
    State(state): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<RectsQuery>, QueryRejection>,
) -> Result<Json<Value>, ApiError> {
    let session = state.session(&id)?;
    let q = query(q)?;
    let snap = session.snapshot();
    let activity = activity_for(&snap, q.defines.as_deref());
    let rects = editor_rects_with_activity(&snap.tree, &snap.source, &state.inner.palette, activity.as_ref())
        .map_err(|e| ApiError::unprocessable("E_MISMATCH", e.to_string()))?;
    Ok(Json(json!({ "version": snap.version, "rects": rects, "activity": activity })))
}

/// Default overview granularity when the client does not pass `g`.
pub const DEFAULT_GRANULARITY: usize = 2;

#[derive(Deserialize)]
struct OverviewQuery {
    w: Option<u32>,
    h: Option<u32>,
    g: Option<usize>,
    from: Option<usize>,
    to: Option<usize>,
    /// Comma-separated line numbers; defaults to the lines with parse diagnostics.
    errors: Option<String>,
    defines: Option<String>,
}

async fn get_overview(
    State(state): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<OverviewQuery>, QueryRejection>,
) -> Result<Json<Value>, ApiError> {
    let session = state.session(&id)?;
    let q = query(q)?;
    let (Some(w), Some(h)) = (q.w, q.h) else {
        return Err(ApiError::bad_request("w and h are required"));
    };
    let snap = session.snapshot();
    let zoom = match (q.from, q.to) {
        (None, None) => None,
        (Some(a), Some(b)) => Some((a, b)),
        _ => return Err(ApiError::bad_request("from and to must be given together")),
    };
    let params = OverviewParams {
        view_width: w,
        view_height: h,
        granularity: q.g.unwrap_or(DEFAULT_GRANULARITY),
        zoom,
    };
    let activity = activity_for(&snap, q.defines.as_deref());
    let model = overview_model(&snap.tree, &snap.source, params, &state.inner.palette, activity.as_ref())?;
    let error_lines: Vec<usize> = match &q.errors {
        Some(list) => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| ApiError::bad_request("errors must be comma-separated line numbers"))?,
        None => snap.diagnostics.iter().map(|d| d.pos.line).collect(),
    };
    let model = mark_errors(model, &error_lines);
    let mut out = serde_json::to_value(&model).expect("model serializes");
    out["version"] = json!(snap.version);
    Ok(Json(out))
}

#[derive(Deserialize)]
struct ExtractRequest {
    block_id: usize,
    name: String,
    base_version: Option<u64>,
}

async fn post_extract(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<ExtractRequest>, JsonRejection>,
) -> Result<Json<Value>, ApiError> {
    let session = state.session(&id)?;
    let req = body(payload)?;
    let snap = session.snapshot();
    let base = req.base_version.unwrap_or(snap.version);
    if base != snap.version {
        return Err(brics_core::SessionError::Stale {
            base,
            current: snap.version,
        }
        .into());
    }
    let result = extract_block(&snap.source, session.grammar(), &snap.tree, req.block_id, &req.name)?;
    let next = session.replace_all(snap.version, result.new_source.clone())?;
    let mut out = snapshot_json(&next);
    out["new_source"] = json!(result.new_source);
    out["new_method_lines"] = json!(result.new_method_lines);
    out["call_line"] = json!(result.call_line);
    out["deps"] = json!(result.deps);
    Ok(Json(out))
}

async fn get_events(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let (tx, rx) = tokio::sync::mpsc::unbounded_channel::<String>();
    let subscription = session.subscribe(move |snap| {
        let line = json!({ "version": snap.version, "digest": snap.digest }).to_string() + "\n";
        // a closed receiver means the client went away; the subscription is dropped with the stream
        let _ = tx.send(line);
    });
    let stream = futures::stream::unfold((rx, subscription), |(mut rx, sub)| async move {
        let line = rx.recv().await?;
        Some((Ok::<_, std::convert::Infallible>(line), (rx, sub)))
    });
    Ok((
        [(header::CONTENT_TYPE, "application/x-ndjson"), (header::CACHE_CONTROL, "no-cache")],
        Body::from_stream(stream),
    )
        .into_response())
}

#[derive(Deserialize)]
struct SvgQuery {
    fold: Option<usize>,
    defines: Option<String>,
}

async fn get_svg(
    State(state): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<SvgQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    let q = query(q)?;
    let snap = session.snapshot();
    let activity = activity_for(&snap, q.defines.as_deref());
    let rects = editor_rects_with_activity(&snap.tree, &snap.source, &state.inner.palette, activity.as_ref())
        .map_err(|e| ApiError::unprocessable("E_MISMATCH", e.to_string()))?;
    let folds = q.fold.map(|g| fold_spans(&snap.tree, g)).unwrap_or_default();
    let svg = render_svg(&rects, &folds, &snap.source);
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}
