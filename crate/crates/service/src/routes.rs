use std::sync::Arc;

use axum::body::Body;
use axum::extract::rejection::BytesRejection;
use axum::extract::{RawQuery, Request, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use bytes::Bytes;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;
use tower_http::catch_panic::CatchPanicLayer;
use tower_http::services::ServeDir;

use crate::api::{to_json, LookupRequest, NormalizeRequest, PerturbCorpusBody, PerturbRequestBody, TimelineRequest};
use crate::cache::CacheKey;
use crate::error::ApiError;
use crate::params::QueryParams;
use crate::state::{AppState, Generation};

type Shared = Arc<AppState>;
type Reply = Result<Response, ApiError>;

const CACHE_HEADER: &str = "x-cache";

const PLACEHOLDER: &str = "<!doctype html><html><head><title>pertext</title></head><body>\
<h1>pertext</h1><p>The API is served under <code>/api/v1</code>. \
Set <code>ui_dir</code> in the service config to serve the browser console here.</p></body></html>";

pub fn router(state: Shared) -> Router {
    let api = Router::new()
        .route("/lookup", get(lookup).fallback(method_not_allowed))
        .route("/normalize", post(normalize).fallback(method_not_allowed))
        .route("/perturb", post(perturb).fallback(method_not_allowed))
        .route("/perturb/corpus", post(perturb_corpus).fallback(method_not_allowed))
        .route("/timeline", get(timeline).fallback(method_not_allowed))
        .route("/stats", get(stats).fallback(method_not_allowed))
        .route("/reload", post(reload).fallback(method_not_allowed))
        .fallback(not_found)
        .layer(middleware::from_fn_with_state(state.clone(), require_token));
    let app = Router::new()
        .route("/health", get(health).fallback(method_not_allowed))
        .nest("/api/v1", api);
    let app = match &state.ui_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(|| async { Html(PLACEHOLDER) })).fallback(not_found),
    };
    app.layer(CatchPanicLayer::custom(|_| {
        ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "InternalError",
            "request handler panicked",
        )
        .into_response()
    }))
    .with_state(state)
}

fn token_matches(header: Option<&HeaderValue>, expected: &str) -> bool {
    let Some(given) = header.and_then(|h| h.as_bytes().strip_prefix(b"Bearer ")) else {
        return false;
    };
    let expected = expected.as_bytes();
    given.len() == expected.len() && given.iter().zip(expected).fold(0u8, |acc, (a, b)| acc | (a ^ b)) == 0
}

async fn require_token(State(state): State<Shared>, req: Request, next: Next) -> Response {
    match &state.token {
        Some(t) if !token_matches(req.headers().get(header::AUTHORIZATION), t) => {
            ApiError::unauthorized().into_response()
        }
        _ => next.run(req).await,
    }
}

async fn not_found() -> ApiError {
    ApiError::not_found()
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(
        StatusCode::METHOD_NOT_ALLOWED,
        "MethodNotAllowed",
        "method not allowed on this route",
    )
}

fn json_response(body: Bytes, cache: Option<&'static str>) -> Response {
    let mut headers = HeaderMap::new();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    if let Some(c) = cache {
        headers.insert(CACHE_HEADER, HeaderValue::from_static(c));
    }
    (headers, Body::from(body)).into_response()
}

fn parse_body<T: DeserializeOwned>(body: Result<Bytes, BytesRejection>) -> Result<T, ApiError> {
    let bytes = body.map_err(|r| {
        let status = r.status();
        let code = if status == StatusCode::PAYLOAD_TOO_LARGE {
            "PayloadTooLarge"
        } else {
            "InvalidBody"
        };
        ApiError::new(status, code, r.body_text())
    })?;
    serde_json::from_slice(&bytes).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn canonical<T: Serialize>(req: &T) -> String {
    serde_json::to_string(req).expect("requests serialize")
}

/// Serves `route` for `req` from the cache, computing it on the current
/// generation when absent. Failures are never cached.
async fn cached<T, F>(state: Shared, route: &'static str, req: T, compute: F) -> Reply
where
    T: Serialize + Send + 'static,
    F: FnOnce(&AppState, &Generation, &T) -> Result<Vec<u8>, ApiError> + Send + 'static,
{
    let generation = state.current();
    let key = CacheKey {
        route,
        params: canonical(&req),
        generation: generation.id,
    };
    if let Some(body) = state.cache.get(&key) {
        return Ok(json_response(body, Some("hit")));
    }
    let st = state.clone();
    let body = tokio::task::spawn_blocking(move || compute(&st, &generation, &req))
        .await
        .map_err(|_| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "InternalError", "worker failed"))??;
    let body = Bytes::from(body);
    state.cache.put(key, body.clone());
    Ok(json_response(body, Some("miss")))
}

async fn lookup(State(state): State<Shared>, RawQuery(q): RawQuery) -> Reply {
    let mut q = QueryParams::parse(q.as_deref())?;
    let d = LookupRequest::new("", 1, 3);
    let req = LookupRequest {
        token: q.require("token")?,
        k: q.take("k", d.k)?,
        d: q.take("d", d.d)?,
        case_sensitive: q.take("case_sensitive", d.case_sensitive)?,
        min_count: q.take("min_count", d.min_count)?,
        include_query: q.take("include_query", d.include_query)?,
    };
    q.finish()?;
    cached(state, "lookup", req, |_, g, r| Ok(to_json(&r.run(&g.index)?))).await
}

async fn normalize(State(state): State<Shared>, body: Result<Bytes, BytesRejection>) -> Reply {
    let req: NormalizeRequest = parse_body(body)?;
    cached(state, "normalize", req, |st, g, r| {
        let dict = g
            .dictionary
            .as_ref()
            .ok_or_else(|| ApiError::not_configured("dictionary"))?;
        Ok(to_json(&r.run(dict, st.resources.scorer())?))
    })
    .await
}

async fn perturb(State(state): State<Shared>, body: Result<Bytes, BytesRejection>) -> Reply {
    let req: PerturbRequestBody = parse_body(body)?;
    cached(state, "perturb", req, |_, g, r| Ok(to_json(&r.run(&g.index)?))).await
}

async fn perturb_corpus(State(state): State<Shared>, body: Result<Bytes, BytesRejection>) -> Reply {
    let req: PerturbCorpusBody = parse_body(body)?;
    cached(state, "perturb/corpus", req, |_, g, r| Ok(to_json(&r.run(&g.index)?))).await
}

async fn timeline(State(state): State<Shared>, RawQuery(q): RawQuery) -> Reply {
    let mut q = QueryParams::parse(q.as_deref())?;
    let d = TimelineRequest::new("");
    let req = TimelineRequest {
        word: q.require("word")?,
        from: q.take_str("from").filter(|s| !s.is_empty()),
        to: q.take_str("to").filter(|s| !s.is_empty()),
        granularity: q.take("granularity", d.granularity)?,
        k: q.take("k", d.k)?,
        d: q.take("d", d.d)?,
        split_variants: q.take("split_variants", d.split_variants)?,
    };
    q.finish()?;
    req.query()?;
    cached(state, "timeline", req, |st, g, r| {
        if st.resources.corpus.is_empty() {
            return Err(ApiError::not_configured("corpus"));
        }
        let series = r.run(&g.index, g.corpus.iter().cloned(), st.resources.lexicon.as_ref())?;
        Ok(to_json(&series))
    })
    .await
}

fn headline(g: &Generation) -> (usize, usize) {
    let index = g.index.get(1).or_else(|| g.index.levels.values().next());
    index.map_or((0, 0), |i| {
        let s = i.stats();
        (s.token_count, s.bucket_count)
    })
}

async fn health(State(state): State<Shared>) -> Response {
    let g = state.current();
    let (token_count, bucket_count) = headline(&g);
    let body = json!({
        "status": "ok",
        "generation": g.id,
        "token_count": token_count,
        "bucket_count": bucket_count,
    });
    json_response(Bytes::from(to_json(&body)), None)
}

async fn stats(State(state): State<Shared>) -> Response {
    let g = state.current();
    let levels: serde_json::Map<String, serde_json::Value> = g
        .index
        .levels
        .iter()
        .map(|(k, i)| {
            let s = i.stats();
            (
                k.to_string(),
                json!({"token_count": s.token_count, "bucket_count": s.bucket_count, "document_count": s.document_count}),
            )
        })
        .collect();
    let body = json!({
        "generation": g.id,
        "encoder": g.index.encoder.fingerprint(),
        "levels": levels,
        "dictionary_words": g.dictionary.as_ref().map(|d| d.len()),
        "model_order": state.resources.model.as_ref().map(|m| m.order()),
        "corpus_documents": g.corpus.len(),
        "cache": state.cache.metrics(),
    });
    json_response(Bytes::from(to_json(&body)), None)
}

async fn reload(State(state): State<Shared>) -> Reply {
    let st = state.clone();
    let outcome = tokio::task::spawn_blocking(move || st.reload_index(&st.index_dir))
        .await
        .map_err(|_| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "InternalError", "worker failed"))?;
    match outcome {
        Ok(id) => Ok(json_response(Bytes::from(to_json(&json!({"generation": id}))), None)),
        Err(e) => {
            tracing::warn!(code = e.code(), error = %e, "reload failed; keeping the serving index");
            Err(e.into())
        }
    }
}
