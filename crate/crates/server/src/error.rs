use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use orderlearn::datasets::DatasetError;
use orderlearn::experiment::ExperimentError;
use orderlearn::order::{ConflictingLabel, Pair};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("no session {0:?}")]
    UnknownSession(String),
    #[error("{got} is not the query being served{}", expected.map(|p| format!(" ({p} is)")).unwrap_or_default())]
    StalePair { expected: Option<Pair>, got: Pair },
    #[error(transparent)]
    Conflict(ConflictingLabel),
    #[error("session is halted after a conflicting label")]
    Halted,
    #[error("session has no queries left")]
    Exhausted,
    #[error("label log does not match the dataset: {0}")]
    LogMismatch(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownDataset(_) | ServiceError::UnknownStrategy(_) | ServiceError::BadRequest(_) => {
                StatusCode::BAD_REQUEST
            }
            ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::StalePair { .. }
            | ServiceError::Conflict(_)
            | ServiceError::Halted
            | ServiceError::Exhausted => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ServiceError::UnknownDataset(_) => "unknown_dataset",
            ServiceError::UnknownStrategy(_) => "unknown_strategy",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::StalePair { .. } => "stale_pair",
            ServiceError::Conflict(_) => "conflict",
            ServiceError::Halted => "halted",
            ServiceError::Exhausted => "exhausted",
            ServiceError::LogMismatch(_) => "log_mismatch",
            _ => "internal",
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.kind(), "message": self.to_string() });
        match &self {
            ServiceError::Conflict(c) => body["conflict"] = json!(c),
            ServiceError::StalePair { expected, .. } => body["expected"] = json!(expected),
            _ => {}
        }
        (self.status(), Json(body)).into_response()
    }
}
