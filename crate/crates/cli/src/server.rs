//! JSON-over-HTTP access to an [`Engine`].

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use chronoline::engine::{Engine, EngineError, TimelineRequest};
use chronoline::selector::ModelVariant;
use chronoline::Timestamp;
use serde::Serialize;
use tower_http::cors::{Any, CorsLayer};

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    code: u16,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError { status: StatusCode::BAD_REQUEST, message: message.into() }
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let status = match e {
            EngineError::NotFound(_) => StatusCode::NOT_FOUND,
            EngineError::InvalidParam { .. } | EngineError::Select(_) => StatusCode::BAD_REQUEST,
        };
        ApiError { status, message: e.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody { error: self.message, code: self.status.as_u16() };
        (self.status, Json(body)).into_response()
    }
}

type Params = HashMap<String, String>;

fn parse_field<T>(params: &Params, field: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>, ApiError> {
    match params.get(field).map(|v| v.trim()) {
        None | Some("") => Ok(None),
        Some(v) => parse(v)
            .map(Some)
            .ok_or_else(|| ApiError::bad_request(format!("invalid {field}: `{v}`"))),
    }
}

/// Query parameters of `/api/timeline` as an engine request.
pub fn timeline_request(params: &Params) -> Result<TimelineRequest, ApiError> {
    let entity = params
        .get("entity")
        .map(|e| e.trim())
        .filter(|e| !e.is_empty())
        .ok_or_else(|| ApiError::bad_request("missing entity"))?;
    Ok(TimelineRequest {
        entity: entity.to_string(),
        start: parse_field(params, "start", |v| Timestamp::parse(v).ok())?,
        end: parse_field(params, "end", |v| Timestamp::parse(v).ok())?,
        width: parse_field(params, "width", |v| v.parse().ok().filter(|w: &u32| *w > 0))?,
        height: parse_field(params, "height", |v| v.parse().ok().filter(|h: &u32| *h > 0))?,
        variant: parse_field(params, "variant", |v| v.parse::<ModelVariant>().ok())?.unwrap_or(ModelVariant::Full),
    })
}

async fn timeline(State(engine): State<Arc<Engine>>, Query(params): Query<Params>) -> Result<Response, ApiError> {
    let req = timeline_request(&params)?;
    let doc = tokio::task::spawn_blocking(move || engine.timeline_doc(&req))
        .await
        .map_err(|e| ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, message: e.to_string() })??;
    Ok(Json(doc).into_response())
}

async fn entity(State(engine): State<Arc<Engine>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(engine.entity(&id)?).into_response())
}

async fn search(State(engine): State<Arc<Engine>>, Query(params): Query<Params>) -> Result<Response, ApiError> {
    let q = params.get("q").ok_or_else(|| ApiError::bad_request("missing q"))?;
    Ok(Json(engine.search(q)).into_response())
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn not_found() -> ApiError {
    ApiError { status: StatusCode::NOT_FOUND, message: "no such route".into() }
}

pub fn router(engine: Arc<Engine>) -> Router {
    let cors = CorsLayer::new().allow_origin(Any).allow_methods([Method::GET]);
    Router::new()
        .route("/api/timeline", get(timeline))
        .route("/api/entity/:id", get(entity))
        .route("/api/search", get(search))
        .route("/healthz", get(healthz))
        .fallback(not_found)
        .layer(cors)
        .with_state(engine)
}

pub async fn serve(engine: Engine, bind: SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(engine))).await?;
    Ok(())
}
