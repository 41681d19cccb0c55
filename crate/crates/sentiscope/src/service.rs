//! HTTP boundary.
//!
//! | method | path                | body / query                                   |
//! |--------|---------------------|------------------------------------------------|
//! | GET    | `/search`           | `q`, `pos_min`, `pos_max`, `neg_min`, `neg_max`, `limit` |
//! | POST   | `/events`           | one session event (log line format)            |
//! | GET    | `/report/treatment` |                                                |
//! | GET    | `/report/taxonomy`  |                                                |
//! | GET    | `/corpus/stats`     |                                                |
//!
//! Errors are `{"error": <code>, "message": <text>}` with a 4xx/5xx status.

use std::sync::{Arc, Mutex};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use sentiscope_core::facets::SentimentRect;
use sentiscope_core::index::SearchError;
use serde::Deserialize;
use serde_json::json;

use crate::engine::{Engine, SearchResponse};
use crate::event_log::{AppendError, EventLogFile, WireError, WireEvent};
use crate::report::{render_report, ReportError, ReportKind};

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({ "error": self.code, "message": self.message })),
        )
            .into_response()
    }
}

impl From<SearchError> for ApiError {
    fn from(e: SearchError) -> Self {
        let code = match e {
            SearchError::EmptyQuery => "empty_query",
            SearchError::InvalidLimit => "bad_limit",
            SearchError::InvalidParams(_) => "bad_params",
        };
        ApiError::new(StatusCode::BAD_REQUEST, code, e.to_string())
    }
}

impl From<ReportError> for ApiError {
    fn from(e: ReportError) -> Self {
        let code = match e {
            ReportError::NoData => "no_data",
            ReportError::Analytics(_) => "insufficient_data",
        };
        ApiError::new(StatusCode::CONFLICT, code, e.to_string())
    }
}

pub struct AppState {
    pub engine: Engine,
    pub log: Mutex<EventLogFile>,
}

#[derive(Debug, Default, Deserialize)]
pub struct SearchParams {
    #[serde(default)]
    pub q: String,
    pub pos_min: Option<f64>,
    pub pos_max: Option<f64>,
    pub neg_min: Option<f64>,
    pub neg_max: Option<f64>,
    pub limit: Option<usize>,
}

impl SearchParams {
    /// Missing bounds default to the full score range.
    pub fn rect(&self) -> Result<SentimentRect, ApiError> {
        let full = SentimentRect::FULL;
        SentimentRect::new(
            self.pos_min.unwrap_or(full.pos_min),
            self.pos_max.unwrap_or(full.pos_max),
            self.neg_min.unwrap_or(full.neg_min),
            self.neg_max.unwrap_or(full.neg_max),
        )
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_rect", e.to_string()))
    }
}

pub fn handle_search(engine: &Engine, params: &SearchParams) -> Result<SearchResponse, ApiError> {
    let rect = params.rect()?;
    Ok(engine.search(&params.q, rect, params.limit)?)
}

/// Decodes and durably appends one event.
pub fn handle_event(log: &Mutex<EventLogFile>, body: WireEvent) -> Result<usize, ApiError> {
    let event = body.decode().map_err(|e| match e {
        WireError::UnknownKind(_) => ApiError::new(StatusCode::BAD_REQUEST, "unknown_kind", e.to_string()),
        _ => ApiError::new(StatusCode::BAD_REQUEST, "bad_event", e.to_string()),
    })?;
    let mut log = log.lock().unwrap_or_else(|poisoned| poisoned.into_inner());
    log.append(event).map_err(|e| match e {
        AppendError::Rejected(sentiscope_core::session::RecordError::Sequence(s)) => {
            ApiError::new(StatusCode::CONFLICT, "sequencing", s.to_string())
        }
        AppendError::Rejected(other) => ApiError::new(StatusCode::BAD_REQUEST, "bad_event", other.to_string()),
        AppendError::Io(io) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "io", io.to_string()),
    })
}

pub fn handle_report(log: &Mutex<EventLogFile>, kind: ReportKind) -> Result<String, ApiError> {
    let metrics = {
        let log = log.lock().unwrap_or_else(|poisoned| poisoned.into_inner());
        log.log().all_metrics()
    };
    Ok(render_report(kind, &metrics.metrics)?)
}

async fn search_route(
    State(state): State<Arc<AppState>>,
    params: Result<Query<SearchParams>, QueryRejection>,
) -> Result<Json<SearchResponse>, ApiError> {
    let Query(params) = params.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text()))?;
    handle_search(&state.engine, &params).map(Json)
}

async fn events_route(
    State(state): State<Arc<AppState>>,
    body: Result<Json<WireEvent>, JsonRejection>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let Json(body) = body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_event", e.body_text()))?;
    let state = state.clone();
    // the append blocks on fsync
    let count = tokio::task::spawn_blocking(move || handle_event(&state.log, body))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(json!({ "status": "ok", "events": count })))
}

async fn report_route(State(state): State<Arc<AppState>>, Path(kind): Path<String>) -> Result<Response, ApiError> {
    let kind: ReportKind = kind
        .parse()
        .map_err(|e: String| ApiError::new(StatusCode::NOT_FOUND, "unknown_report", e))?;
    let body = handle_report(&state.log, kind)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

async fn stats_route(State(state): State<Arc<AppState>>) -> Json<sentiscope_core::facets::DistributionSummary> {
    Json(state.engine.corpus_stats())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/search", get(search_route))
        .route("/events", post(events_route))
        .route("/report/{kind}", get(report_route))
        .route("/corpus/stats", get(stats_route))
        .with_state(state)
}

/// Binds `listen`, prints the bound address on stdout and serves until killed.
pub async fn serve(state: Arc<AppState>, listen: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    let addr = listener.local_addr()?;
    println!("listening on http://{addr}");
    use std::io::Write as _;
    std::io::stdout().flush()?;
    axum::serve(listener, router(state)).await
}
