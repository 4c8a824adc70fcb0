//! JSON over HTTP.
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/api/models` | public versions |
//! | POST | `/api/models/{m}/{v}/sessions[?key=]` | `{locale}` starts a session |
//! | GET | `/api/sessions/{s}` | session state |
//! | POST | `/api/sessions/{s}/answers` | `{nodeId, answer}` |
//! | POST | `/api/sessions/{s}/revise` | `{index, answer}` |
//! | POST | `/api/sessions/{s}/locale` | `{locale}` new session, same answers |
//! | GET | `/api/sessions/{s}/report` | final report |
//! | POST | `/api/comments[?key=]` | store a comment |
//! | PUT | `/api/admin/models/{m}/{v}/visibility` | `{visibility}` |
//! | POST | `/api/admin/models` | zip bundle, hosted private |
//! | GET | `/api/admin/comments` | all comments |
//!
//! Admin calls carry `Authorization: Bearer <token>`. Unknown versions, wrong
//! keys and wrong tokens all get the same 403 body.

use std::io::Write;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::Deserialize;

use super::{Config, NewComment, Service, ServiceError, StartError, Visibility};

const MAX_UPLOAD: usize = 16 * 1024 * 1024;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self {
            ServiceError::Forbidden => StatusCode::FORBIDDEN,
            ServiceError::NotFound => StatusCode::NOT_FOUND,
            ServiceError::Stale(_) | ServiceError::Conflict(_) => StatusCode::CONFLICT,
            ServiceError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Storage(_) => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::Fault(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

type Shared = State<Arc<Service>>;
type ApiResult<T> = Result<T, ServiceError>;

#[derive(Deserialize)]
struct KeyQuery {
    key: Option<String>,
}

#[derive(Deserialize, Default)]
struct LocaleBody {
    #[serde(default)]
    locale: Option<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct AnswerBody {
    node_id: String,
    answer: String,
}

#[derive(Deserialize)]
struct ReviseBody {
    index: usize,
    answer: String,
}

#[derive(Deserialize)]
struct VisibilityBody {
    visibility: Visibility,
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/api/models", get(list_models))
        .route("/api/models/{m}/{v}/sessions", post(create_session))
        .route("/api/sessions/{s}", get(get_session))
        .route("/api/sessions/{s}/answers", post(answer))
        .route("/api/sessions/{s}/revise", post(revise))
        .route("/api/sessions/{s}/locale", post(relocalize))
        .route("/api/sessions/{s}/report", get(report))
        .route("/api/comments", post(comment))
        .route("/api/admin/models/{m}/{v}/visibility", put(visibility))
        .route("/api/admin/models", post(upload))
        .route("/api/admin/comments", get(admin_comments))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD))
        .with_state(service)
}

async fn list_models(State(s): Shared) -> impl IntoResponse {
    Json(s.list_models())
}

async fn create_session(
    State(s): Shared,
    Path((m, v)): Path<(String, String)>,
    Query(q): Query<KeyQuery>,
    body: Option<Json<LocaleBody>>,
) -> ApiResult<impl IntoResponse> {
    let locale = body.and_then(|Json(b)| b.locale);
    let view = s.create_session(&m, &v, q.key.as_deref(), locale.as_deref())?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(State(s): Shared, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(s.session(&id)?))
}

async fn answer(State(s): Shared, Path(id): Path<String>, Json(b): Json<AnswerBody>) -> ApiResult<impl IntoResponse> {
    Ok(Json(s.answer(&id, &b.node_id, &b.answer)?))
}

async fn revise(State(s): Shared, Path(id): Path<String>, Json(b): Json<ReviseBody>) -> ApiResult<impl IntoResponse> {
    Ok(Json(s.revise(&id, b.index, &b.answer)?))
}

async fn relocalize(State(s): Shared, Path(id): Path<String>, Json(b): Json<LocaleBody>) -> ApiResult<impl IntoResponse> {
    Ok((StatusCode::CREATED, Json(s.relocalize(&id, b.locale.as_deref())?)))
}

async fn report(State(s): Shared, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let bytes = s.report_json(&id)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], bytes))
}

async fn comment(State(s): Shared, Query(q): Query<KeyQuery>, Json(c): Json<NewComment>) -> ApiResult<impl IntoResponse> {
    Ok((StatusCode::CREATED, Json(s.add_comment(c, q.key.as_deref())?)))
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers
        .get(header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(str::trim)
}

async fn visibility(
    State(s): Shared,
    headers: HeaderMap,
    Path((m, v)): Path<(String, String)>,
    Json(b): Json<VisibilityBody>,
) -> ApiResult<impl IntoResponse> {
    s.check_admin(bearer(&headers))?;
    Ok(Json(s.set_visibility(&m, &v, b.visibility)?))
}

async fn upload(State(s): Shared, headers: HeaderMap, body: Bytes) -> ApiResult<impl IntoResponse> {
    s.check_admin(bearer(&headers))?;
    Ok((StatusCode::CREATED, Json(s.upload(&body)?)))
}

async fn admin_comments(State(s): Shared, headers: HeaderMap) -> ApiResult<impl IntoResponse> {
    s.check_admin(bearer(&headers))?;
    Ok(Json(s.comments()))
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Start(#[from] StartError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Opens the service and serves it until the process ends.
pub async fn serve(config: Config, log: &mut dyn Write) -> Result<(), ServeError> {
    let service = Service::open(&config)?;
    for w in service.warnings() {
        let _ = writeln!(log, "warning: {w}");
    }
    let listener = tokio::net::TcpListener::bind(&config.listen).await?;
    let _ = writeln!(log, "listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(service))).await?;
    Ok(())
}
