use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use chrono::NaiveDate;
use feedgram_core::query::{
    find_bigrams, run_query, to_csv, BigramHit, BigramMode, MatchMode, QueryError, QueryResult,
    QuerySpec, DEFAULT_BIGRAM_LIMIT, DEFAULT_PATTERN_LIMIT,
};
use feedgram_core::store::export::{unigram_file_name, weekly_file_name};
use feedgram_core::store::{CorpusMeta, NgramKind};
use serde::Serialize;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::snapshot::{Published, SnapshotHandle};

pub const SCHEMA_VERSION: u32 = 1;
pub const GENERATION_HEADER: &str = "x-snapshot-generation";

#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_patterns: usize,
    pub bigram_limit: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_patterns: DEFAULT_PATTERN_LIMIT,
            bigram_limit: DEFAULT_BIGRAM_LIMIT,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub snapshots: Arc<SnapshotHandle>,
    pub limits: Limits,
}

/// Allowed browser origins for cross-origin requests.
#[derive(Debug, Clone, Default)]
pub enum Cors {
    #[default]
    Any,
    Origins(Vec<HeaderValue>),
}

pub fn router(state: AppState, cors: Cors) -> Router {
    let cors = CorsLayer::new()
        .allow_methods([axum::http::Method::GET])
        .expose_headers([header::HeaderName::from_static(GENERATION_HEADER)])
        .allow_origin(match cors {
            Cors::Any => AllowOrigin::any(),
            Cors::Origins(list) => AllowOrigin::list(list),
        });
    Router::new()
        .route("/api/v1/meta", get(meta))
        .route("/api/v1/query", get(query))
        .route("/api/v1/bigrams", get(bigrams))
        .route("/api/v1/export.csv", get(export_csv))
        .route("/downloads/{file}", get(download))
        .layer(cors)
        .with_state(state)
}

#[derive(Debug)]
pub enum ApiError {
    NotReady,
    BadRequest(String),
    TooManyPatterns(String),
    NotFound(String),
    Internal(String),
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::TooManyPatterns { .. } => Self::TooManyPatterns(e.to_string()),
            QueryError::InvalidQuery(_) | QueryError::EmptyRange { .. } => {
                Self::BadRequest(e.to_string())
            }
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    schema_version: u32,
    error: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code, message) = match &self {
            Self::NotReady => (
                StatusCode::SERVICE_UNAVAILABLE,
                "not_ready",
                "no snapshot has been published yet",
            ),
            Self::BadRequest(m) => (StatusCode::BAD_REQUEST, "invalid_query", m.as_str()),
            Self::TooManyPatterns(m) => (StatusCode::PAYLOAD_TOO_LARGE, "too_many_patterns", m.as_str()),
            Self::NotFound(m) => (StatusCode::NOT_FOUND, "not_found", m.as_str()),
            Self::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", m.as_str()),
        };
        let body = ErrorBody {
            schema_version: SCHEMA_VERSION,
            error: code,
            message,
        };
        (status, Json(body)).into_response()
    }
}

fn snapshot(state: &AppState) -> Result<Arc<Published>, ApiError> {
    state.snapshots.current().ok_or(ApiError::NotReady)
}

fn with_generation(mut response: Response, generation: u64) -> Response {
    response
        .headers_mut()
        .insert(GENERATION_HEADER, HeaderValue::from(generation));
    response
}

#[derive(Serialize)]
struct MetaBody<'a> {
    schema_version: u32,
    #[serde(flatten)]
    meta: &'a CorpusMeta,
}

async fn meta(State(state): State<AppState>) -> Result<Response, ApiError> {
    let snap = snapshot(&state)?;
    let body = MetaBody {
        schema_version: SCHEMA_VERSION,
        meta: &snap.meta,
    };
    Ok(with_generation(Json(body).into_response(), snap.generation()))
}

type Params = HashMap<String, String>;

fn param<'a>(params: &'a Params, name: &str) -> Option<&'a str> {
    params.get(name).map(String::as_str).filter(|v| !v.trim().is_empty())
}

fn date_param(params: &Params, name: &str) -> Result<Option<NaiveDate>, ApiError> {
    param(params, name)
        .map(|v| {
            v.trim()
                .parse::<NaiveDate>()
                .map_err(|_| ApiError::BadRequest(format!("{name}: expected YYYY-MM-DD, got {v:?}")))
        })
        .transpose()
}

fn number_param<T: std::str::FromStr>(params: &Params, name: &str) -> Result<Option<T>, ApiError> {
    param(params, name)
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|_| ApiError::BadRequest(format!("{name}: not a number: {v:?}")))
        })
        .transpose()
}

fn query_spec(snap: &Published, params: &Params, limits: Limits) -> Result<QuerySpec, ApiError> {
    let patterns = param(params, "patterns")
        .ok_or_else(|| ApiError::BadRequest("patterns is required".into()))?;
    let mode = match param(params, "mode") {
        Some(m) => m.parse::<MatchMode>().map_err(|e| ApiError::BadRequest(e.to_string()))?,
        None => MatchMode::Exact,
    };
    let window = number_param::<u32>(params, "window")?.unwrap_or(1);
    let from = date_param(params, "from")?;
    let to = date_param(params, "to")?;
    Ok(QuerySpec::parse_for(
        &snap.index,
        patterns,
        mode,
        from,
        to,
        window,
        limits.max_patterns,
    )?)
}

async fn compute<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
}

#[derive(Serialize)]
struct QueryBody {
    schema_version: u32,
    generation: u64,
    #[serde(flatten)]
    result: QueryResult,
}

async fn query(State(state): State<AppState>, Query(params): Query<Params>) -> Result<Response, ApiError> {
    let snap = snapshot(&state)?;
    let generation = snap.generation();
    let result = compute(move || {
        let spec = query_spec(&snap, &params, state.limits)?;
        Ok(run_query(&snap.index, &spec)?)
    })
    .await?;
    let body = QueryBody {
        schema_version: SCHEMA_VERSION,
        generation,
        result,
    };
    Ok(with_generation(Json(body).into_response(), generation))
}

async fn export_csv(State(state): State<AppState>, Query(params): Query<Params>) -> Result<Response, ApiError> {
    let snap = snapshot(&state)?;
    let generation = snap.generation();
    let csv = compute(move || {
        let spec = query_spec(&snap, &params, state.limits)?;
        Ok(to_csv(&run_query(&snap.index, &spec)?))
    })
    .await?;
    let response = (
        [
            (header::CONTENT_TYPE, "text/csv; charset=utf-8"),
            (header::CONTENT_DISPOSITION, "attachment; filename=\"query.csv\""),
        ],
        csv,
    )
        .into_response();
    Ok(with_generation(response, generation))
}

#[derive(Serialize)]
struct BigramRow {
    bigram: String,
    #[serde(flatten)]
    hit: BigramHit,
}

#[derive(Serialize)]
struct BigramBody {
    schema_version: u32,
    generation: u64,
    pattern: String,
    mode: BigramMode,
    from: NaiveDate,
    to: NaiveDate,
    results: Vec<BigramRow>,
}

async fn bigrams(State(state): State<AppState>, Query(params): Query<Params>) -> Result<Response, ApiError> {
    let snap = snapshot(&state)?;
    let generation = snap.generation();
    let body = compute(move || {
        let pattern = param(&params, "pattern")
            .ok_or_else(|| ApiError::BadRequest("pattern is required".into()))?
            .to_string();
        let mode = match param(&params, "bmode") {
            Some(m) => m.parse::<BigramMode>().map_err(|e| ApiError::BadRequest(e.to_string()))?,
            None => BigramMode::Anywhere,
        };
        let limit = number_param::<usize>(&params, "limit")?.unwrap_or(state.limits.bigram_limit);
        let from = date_param(&params, "from")?.unwrap_or(snap.meta.first_date);
        let to = date_param(&params, "to")?.unwrap_or(snap.meta.last_date);
        let hits = find_bigrams(&snap.index, &pattern, mode, from, to, limit)?;
        let (from, to) = (from.max(snap.meta.first_date), to.min(snap.meta.last_date));
        Ok(BigramBody {
            schema_version: SCHEMA_VERSION,
            generation,
            pattern,
            mode,
            from,
            to,
            results: hits
                .into_iter()
                .map(|hit| BigramRow {
                    bigram: hit.text(),
                    hit,
                })
                .collect(),
        })
    })
    .await?;
    Ok(with_generation(Json(body).into_response(), generation))
}

/// Maps a public download name to the file inside a generation directory.
fn download_target(file: &str, meta: &CorpusMeta) -> Option<(String, &'static str)> {
    if file == "metrics.csv" {
        return Some((file.to_string(), "text/csv; charset=utf-8"));
    }
    if file == "report.html" {
        return Some((file.to_string(), "text/html; charset=utf-8"));
    }
    let tsv = "text/tab-separated-values; charset=utf-8";
    let date = |prefix: &str| -> Option<NaiveDate> {
        file.strip_prefix(prefix)?.strip_suffix(".tsv")?.parse().ok()
    };
    if let Some(d) = date("daily-unigrams-") {
        return (meta.first_date..=meta.last_date)
            .contains(&d)
            .then(|| (unigram_file_name(d), tsv));
    }
    if let Some(d) = date("weekly-unigrams-") {
        return Some((weekly_file_name(NgramKind::Unigram, d), tsv));
    }
    None
}

async fn download(State(state): State<AppState>, Path(file): Path<String>) -> Result<Response, ApiError> {
    let snap = snapshot(&state)?;
    let not_found = || ApiError::NotFound(format!("no download named {file:?}"));
    let (name, content_type) = download_target(&file, &snap.meta).ok_or_else(not_found)?;
    let body = match tokio::fs::read(snap.dir.join(&name)).await {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(not_found()),
        Err(e) => return Err(ApiError::Internal(e.to_string())),
    };
    let response = ([(header::CONTENT_TYPE, content_type)], body).into_response();
    Ok(with_generation(response, snap.generation()))
}
