use std::path::PathBuf;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use fundscape::layout::LayoutError;

/// Failures of startup and of the pipeline commands.
#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Store(#[from] fundscape::store::StoreError),
    #[error(transparent)]
    Metrics(#[from] fundscape::metrics::MetricsError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Predictor(#[from] fundscape::predictor::PredictorError),
    #[error(transparent)]
    Atlas(#[from] fundscape::atlas::AtlasError),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> ServiceError {
    let path = path.into();
    move |source| ServiceError::Io { path, source }
}

/// Request failure rendered as `{"error": {"code", "message"}}`.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Unavailable(String),
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Unavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ApiError::BadRequest(_) => "bad_request",
            ApiError::NotFound(_) => "not_found",
            ApiError::Unavailable(_) => "unavailable",
            ApiError::Internal(_) => "internal",
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    code: &'a str,
    message: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: ErrorDetail {
                code: self.code(),
                message: self.to_string(),
            },
        };
        (self.status(), Json(body)).into_response()
    }
}

impl From<LayoutError> for ApiError {
    fn from(e: LayoutError) -> Self {
        match e {
            LayoutError::UnknownField(_) => ApiError::NotFound(e.to_string()),
            LayoutError::Params(_) | LayoutError::CanvasTooSmall { .. } => ApiError::BadRequest(e.to_string()),
            other => ApiError::Internal(format!("layout failed: {other}")),
        }
    }
}

impl From<fundscape::store::StoreError> for ApiError {
    fn from(e: fundscape::store::StoreError) -> Self {
        ApiError::BadRequest(e.to_string())
    }
}

impl From<fundscape::atlas::AtlasError> for ApiError {
    fn from(e: fundscape::atlas::AtlasError) -> Self {
        use fundscape::atlas::AtlasError;
        match e {
            AtlasError::UnknownNode(_) => ApiError::NotFound(e.to_string()),
            AtlasError::Metrics(m) => ApiError::Internal(m.to_string()),
            other => ApiError::BadRequest(other.to_string()),
        }
    }
}

impl From<fundscape::metrics::MetricsError> for ApiError {
    fn from(e: fundscape::metrics::MetricsError) -> Self {
        ApiError::Internal(e.to_string())
    }
}

impl From<fundscape::predictor::PredictorError> for ApiError {
    fn from(e: fundscape::predictor::PredictorError) -> Self {
        ApiError::Internal(e.to_string())
    }
}
