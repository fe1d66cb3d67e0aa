//! HTTP routes. Every handler runs its view on the blocking pool and
//! answers JSON; failures use the shared error body.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use serde::de::DeserializeOwned;
use serde::Serialize;
use tower_http::services::ServeDir;

use crate::config::ServiceConfig;
use crate::error::{ApiError, ServiceError};
use crate::state::AppState;
use crate::views;

type Shared = Arc<AppState>;

fn params<T: DeserializeOwned>(uri: &Uri) -> Result<T, ApiError> {
    Query::<T>::try_from_uri(uri)
        .map(|Query(p)| p)
        .map_err(|e| ApiError::BadRequest(e.body_text()))
}

async fn respond<T, F>(state: Shared, view: F) -> Response
where
    T: Serialize,
    F: FnOnce(&AppState) -> Result<T, ApiError> + Send + 'static,
{
    let body = tokio::task::spawn_blocking(move || {
        let payload = view(&state)?;
        serde_json::to_vec(&payload).map_err(|e| ApiError::Internal(e.to_string()))
    })
    .await
    .unwrap_or_else(|e| Err(ApiError::Internal(format!("request task failed: {e}"))));
    match body {
        Ok(bytes) => (StatusCode::OK, [(header::CONTENT_TYPE, "application/json")], bytes).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn health(State(state): State<Shared>) -> Response {
    respond(state, |s| Ok(views::health(s))).await
}

async fn grants(State(state): State<Shared>, uri: Uri) -> Response {
    respond(state, move |s| views::grants(s, &params(&uri)?)).await
}

async fn fields(State(state): State<Shared>, uri: Uri) -> Response {
    respond(state, move |s| views::fields(s, &params(&uri)?, &params(&uri)?)).await
}

async fn pis(State(state): State<Shared>, uri: Uri) -> Response {
    respond(state, move |s| views::pis(s, &params(&uri)?)).await
}

async fn landscape(State(state): State<Shared>, uri: Uri) -> Response {
    respond(state, move |s| views::landscape(s, &params(&uri)?)).await
}

async fn impact_types(State(state): State<Shared>, uri: Uri) -> Response {
    respond(state, move |s| views::impact_types(s, &params(&uri)?, &params(&uri)?)).await
}

async fn entity_distribution(State(state): State<Shared>, uri: Uri) -> Response {
    respond(state, move |s| views::entity_distribution(s, &params(&uri)?, &params(&uri)?)).await
}

async fn topic_keywords(State(state): State<Shared>, Path(id): Path<String>, uri: Uri) -> Response {
    respond(state, move |s| views::topic_keywords(s, &id, &params(&uri)?)).await
}

async fn predictions(State(state): State<Shared>, uri: Uri) -> Response {
    respond(state, move |s| views::predictions(s, &params(&uri)?)).await
}

async fn api_not_found(uri: Uri) -> Response {
    ApiError::NotFound(format!("no endpoint {}", uri.path())).into_response()
}

/// All routes over `state`; static assets are served at `/` when
/// `static_dir` is configured.
pub fn router(state: Shared) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/grants", get(grants))
        .route("/fields", get(fields))
        .route("/pis", get(pis))
        .route("/landscape", get(landscape))
        .route("/impact-types", get(impact_types))
        .route("/entity-distribution", get(entity_distribution))
        .route("/topics/{id}/keywords", get(topic_keywords))
        .route("/predictions", get(predictions))
        .fallback(api_not_found);
    let static_dir = state.config.static_dir.clone();
    let app = Router::new().nest("/api", api).with_state(state);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Binds `addr` and serves until the listener fails or ctrl-c arrives.
pub async fn serve_state(state: Shared, addr: SocketAddr) -> Result<(), ServiceError> {
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|source| ServiceError::Bind {
        addr: addr.to_string(),
        source,
    })?;
    let local = listener.local_addr().map_err(|source| ServiceError::Bind {
        addr: addr.to_string(),
        source,
    })?;
    log::info!("serving snapshot {} on http://{local}", state.snapshot.id());
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|source| ServiceError::Bind {
            addr: local.to_string(),
            source,
        })
}

/// Loads the configured snapshot and registry, then serves.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let addr: SocketAddr = format!("{}:{}", config.host, config.port)
        .parse()
        .map_err(|e| ServiceError::Config(format!("bad listen address: {e}")))?;
    let state = tokio::task::spawn_blocking(move || AppState::load(config))
        .await
        .map_err(|e| ServiceError::Config(format!("startup task failed: {e}")))??;
    serve_state(Arc::new(state), addr).await
}
