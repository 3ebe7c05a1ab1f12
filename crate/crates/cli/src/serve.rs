//! Read-only SPARQL endpoint over a loaded store.
//!
//! `GET /sparql?query=...` and `POST /sparql` with an
//! `application/sparql-query` or form-encoded body. SELECT and ASK answer
//! with SPARQL JSON results, CONSTRUCT with Turtle. Update requests and
//! methods other than GET and POST get 405.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::any;
use axum::Router;
use kgf_core::query::{evaluate, parse_query, serialize_results, QueryResult, ResultFormat};
use kgf_core::rdf::{parse_nquads, serialize_graph, RdfFormat};
use kgf_core::store::Store;

const UPDATE_KEYWORDS: [&str; 10] = ["INSERT", "DELETE", "LOAD", "CLEAR", "CREATE", "DROP", "COPY", "MOVE", "ADD", "WITH"];

/// Loads an N-Quads artifact, such as an iteration's `store.nq`.
pub fn load_store(path: &Path) -> Result<Store, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let dataset = parse_nquads(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(Store::from_dataset(&dataset))
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/sparql", any(sparql))
        .route("/", any(sparql))
        .with_state(store)
}

/// Serves until ctrl-c.
pub async fn serve(store: Store, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}/sparql", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(store)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn text(status: StatusCode, body: impl Into<String>) -> Response {
    (status, [(header::CONTENT_TYPE, "text/plain; charset=utf-8")], body.into()).into_response()
}

fn not_allowed(message: &str) -> Response {
    (
        StatusCode::METHOD_NOT_ALLOWED,
        [(header::ALLOW, "GET, POST"), (header::CONTENT_TYPE, "text/plain; charset=utf-8")],
        message.to_string(),
    )
        .into_response()
}

/// The first keyword after the prologue, upper-cased.
fn operation_keyword(query: &str) -> String {
    let mut rest = query;
    loop {
        rest = rest.trim_start();
        if rest.starts_with('#') {
            rest = rest.find('\n').map_or("", |i| &rest[i..]);
            continue;
        }
        let word: String = rest.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
        let upper = word.to_ascii_uppercase();
        if upper == "PREFIX" || upper == "BASE" {
            // skip up to and including the IRI
            match rest.find('>') {
                Some(i) => rest = &rest[i + 1..],
                None => return upper,
            }
            continue;
        }
        return upper;
    }
}

pub fn is_update(query: &str) -> bool {
    UPDATE_KEYWORDS.contains(&operation_keyword(query).as_str())
}

fn answer(store: &Store, query: &str) -> Response {
    if is_update(query) {
        return not_allowed("updates are not accepted by this endpoint");
    }
    let parsed = match parse_query(query) {
        Ok(q) => q,
        Err(e) => return text(StatusCode::BAD_REQUEST, e.to_string()),
    };
    match evaluate(&parsed, store) {
        QueryResult::Graph(g) => (
            StatusCode::OK,
            [(header::CONTENT_TYPE, RdfFormat::Turtle.media_type())],
            serialize_graph(&g, RdfFormat::Turtle),
        )
            .into_response(),
        result => (
            StatusCode::OK,
            [(header::CONTENT_TYPE, ResultFormat::Json.media_type())],
            serialize_results(&result, ResultFormat::Json),
        )
            .into_response(),
    }
}

async fn sparql(
    State(store): State<Arc<Store>>,
    method: Method,
    headers: HeaderMap,
    Query(params): Query<HashMap<String, String>>,
    body: Bytes,
) -> Response {
    if params.contains_key("update") {
        return not_allowed("updates are not accepted by this endpoint");
    }
    let query = match method {
        Method::GET => match params.get("query") {
            Some(q) => q.clone(),
            None => return text(StatusCode::BAD_REQUEST, "missing 'query' parameter"),
        },
        Method::POST => {
            let media = headers
                .get(header::CONTENT_TYPE)
                .and_then(|v| v.to_str().ok())
                .map(|v| v.split(';').next().unwrap_or("").trim().to_ascii_lowercase())
                .unwrap_or_default();
            match media.as_str() {
                "application/sparql-query" => match String::from_utf8(body.to_vec()) {
                    Ok(q) => q,
                    Err(_) => return text(StatusCode::BAD_REQUEST, "query is not UTF-8"),
                },
                "application/x-www-form-urlencoded" => {
                    let form: HashMap<String, String> = form_urlencoded::parse(&body).into_owned().collect();
                    if form.contains_key("update") {
                        return not_allowed("updates are not accepted by this endpoint");
                    }
                    match form.get("query") {
                        Some(q) => q.clone(),
                        None => return text(StatusCode::BAD_REQUEST, "missing 'query' field"),
                    }
                }
                "application/sparql-update" => return not_allowed("updates are not accepted by this endpoint"),
                other => {
                    return text(
                        StatusCode::UNSUPPORTED_MEDIA_TYPE,
                        format!("unsupported content type '{other}'; use application/sparql-query"),
                    )
                }
            }
        }
        _ => return not_allowed("only GET and POST are supported"),
    };
    let store = Arc::clone(&store);
    match tokio::task::spawn_blocking(move || answer(&store, &query)).await {
        Ok(r) => r,
        Err(e) => text(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}
