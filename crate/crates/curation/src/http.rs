//! HTTP routes.
//!
//! | method | path                               | body / query                          |
//! |--------|------------------------------------|---------------------------------------|
//! | GET    | `/healthz`                         |                                       |
//! | GET    | `/sessions`                        |                                       |
//! | POST   | `/sessions`                        | `{mode, filter?, seed?}`              |
//! | GET    | `/sessions/{id}`                   |                                       |
//! | GET    | `/sessions/{id}/next`              |                                       |
//! | POST   | `/sessions/{id}/apply`             | `{variant_name}`                      |
//! | GET    | `/items/{id}`                      |                                       |
//! | GET    | `/items/{id}/image.png`            |                                       |
//! | GET    | `/items/{id}/overlay/{a,b}.png`    | `?alpha=0.5`                          |
//! | POST   | `/items/{id}/decision`             | `{choice, reviewer, override?}`       |

use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;

use crate::error::CurationError;
use crate::service::{encode_png, CreateSession, DecisionRequest, Service};

pub type Shared = Arc<RwLock<Service>>;

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

impl IntoResponse for CurationError {
    fn into_response(self) -> Response {
        let status = match &self {
            CurationError::NotFound(_) => StatusCode::NOT_FOUND,
            CurationError::Conflict(_) => StatusCode::CONFLICT,
            e if e.is_io() => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        if status.is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        (status, Json(ErrorBody { error: self.to_string() })).into_response()
    }
}

type ApiResult<T> = Result<T, CurationError>;

/// Runs `f` under the read lock on the blocking pool; mask loading and
/// rendering touch the disk.
async fn read<T, F>(service: Shared, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Service) -> ApiResult<T> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&service.read().unwrap_or_else(|e| e.into_inner())))
        .await
        .map_err(|e| CurationError::Log(format!("worker failed: {e}")))?
}

/// Like [`read`] under the write lock, which serializes all state changes.
async fn write<T, F>(service: Shared, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&mut Service) -> ApiResult<T> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&mut service.write().unwrap_or_else(|e| e.into_inner())))
        .await
        .map_err(|e| CurationError::Log(format!("worker failed: {e}")))?
}

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", get(list_sessions).post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/next", get(next_item))
        .route("/sessions/{id}/apply", post(apply))
        .route("/items/{id}", get(get_item))
        .route("/items/{id}/image.png", get(image))
        .route("/items/{id}/overlay/{file}", get(overlay))
        .route("/items/{id}/decision", post(decide))
        .with_state(service)
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({"status": "ok"}))
}

async fn list_sessions(State(s): State<Shared>) -> ApiResult<impl IntoResponse> {
    read(s, |svc| Ok(Json(svc.sessions()))).await
}

async fn create_session(State(s): State<Shared>, Json(request): Json<CreateSession>) -> ApiResult<impl IntoResponse> {
    let view = write(s, move |svc| svc.create_session(request)).await?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    read(s, move |svc| Ok(Json(svc.session(&id)?))).await
}

async fn next_item(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    read(s, move |svc| Ok(Json(svc.next_item(&id)?))).await
}

async fn get_item(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    read(s, move |svc| Ok(Json(svc.item(&id)?))).await
}

async fn decide(
    State(s): State<Shared>,
    Path(id): Path<String>,
    Json(request): Json<DecisionRequest>,
) -> ApiResult<impl IntoResponse> {
    write(s, move |svc| Ok(Json(svc.submit_decision(&id, request)?))).await
}

#[derive(Deserialize)]
struct ApplyRequest {
    variant_name: String,
}

async fn apply(
    State(s): State<Shared>,
    Path(id): Path<String>,
    Json(request): Json<ApplyRequest>,
) -> ApiResult<impl IntoResponse> {
    write(s, move |svc| Ok(Json(svc.apply(&id, &request.variant_name)?))).await
}

fn png(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes).into_response()
}

async fn image(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    read(s, move |svc| Ok(png(encode_png(&svc.photo(&id)?)))).await
}

#[derive(Deserialize)]
struct OverlayQuery {
    alpha: Option<f32>,
}

async fn overlay(
    State(s): State<Shared>,
    Path((id, file)): Path<(String, String)>,
    Query(query): Query<OverlayQuery>,
) -> ApiResult<Response> {
    let side = file
        .strip_suffix(".png")
        .ok_or_else(|| CurationError::NotFound(format!("overlay {file:?}")))?
        .parse()?;
    let alpha = query.alpha.unwrap_or(0.5);
    read(s, move |svc| Ok(png(encode_png(&svc.overlay(&id, side, alpha)?)))).await
}

/// Serves until ctrl-c.
pub async fn serve(service: Service, addr: SocketAddr) -> std::io::Result<()> {
    let listener = TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(Arc::new(RwLock::new(service))))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
