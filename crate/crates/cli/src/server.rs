//! Read-only HTTP API behind the linked-views explorer.
//!
//! Every response is a pure function of the bundle, which is built once at
//! startup and shared across requests.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, Method, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{Any, CorsLayer};
use tower_http::services::ServeDir;
use wordpixel::top_words;

use crate::bundle::{BundleModel, SessionBundle, TokenPsi};
use crate::error::CliError;

const PLACEHOLDER_INDEX: &str = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>wordpixel</title></head>\
<body><p>wordpixel API is running. Endpoints live under <code>/api/</code>; \
start the server with <code>--ui-dir</code> to serve the explorer.</p></body></html>\n";

struct AppState {
    bundle: SessionBundle,
    png: Vec<u8>,
}

type Shared = Arc<AppState>;

pub fn router(bundle: SessionBundle, ui_dir: Option<PathBuf>) -> Result<Router, CliError> {
    let png = bundle.pixels_png()?;
    let state = Arc::new(AppState { bundle, png });
    let api = Router::new()
        .route("/api/meta", get(meta))
        .route("/api/layout", get(layout))
        .route("/api/pixels", get(pixels))
        .route("/api/token/{i}", get(token))
        .route("/api/passage", get(passage))
        .route("/api/topics", get(topics))
        .route("/api/docs", get(docs))
        .with_state(state);
    let app = match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER_INDEX) })),
    };
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET]);
    Ok(app.layer(cors))
}

/// Bind and serve until the process is stopped. Bind failures surface as
/// errors before any request is accepted.
pub async fn serve(router: Router, addr: SocketAddr) -> Result<(), CliError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| CliError::Data(format!("cannot listen on {addr}: {e}")))?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router).await?;
    Ok(())
}

fn not_found(message: String) -> Response {
    (StatusCode::NOT_FOUND, Json(json!({ "error": message }))).into_response()
}

async fn meta(State(s): State<Shared>) -> Json<serde_json::Value> {
    let b = &s.bundle;
    let mut out = json!({
        "modelType": b.model_type(),
        "tokenMode": b.corpus.token_mode().to_string(),
        "documents": b.corpus.len(),
        "tokens": b.corpus.total_tokens(),
        "modeledTokens": b.index.len(),
    });
    match &b.model {
        BundleModel::Topic { file, palette } => {
            out["k"] = json!(file.k);
            out["alpha"] = json!(file.alpha);
            out["beta"] = json!(file.beta);
            out["vocabSize"] = json!(file.vocab.len());
            out["palette"] = json!(palette.colors()[..file.k]);
        }
        BundleModel::Linear { model, scale, .. } => {
            out["classA"] = json!(model.class_a);
            out["classB"] = json!(model.class_b);
            out["priorLogit"] = json!(model.prior_logit);
            out["orders"] = json!(model.ngram_orders);
            out["features"] = json!(model.weights.len());
            out["scale"] = json!({
                "negative": scale.negative_color,
                "positive": scale.positive_color,
                "midpoint": scale.midpoint_color,
                "magnitude": scale.scale_magnitude,
            });
        }
    }
    Json(out)
}

async fn layout(State(s): State<Shared>) -> Json<wordpixel::PixelLayout> {
    Json(s.bundle.layout)
}

async fn pixels(State(s): State<Shared>) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "image/png")], s.png.clone())
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct TokenInfo {
    pub doc: String,
    pub pos: usize,
    pub text: String,
    pub psi: TokenPsiOwned,
    pub color: String,
}

/// `psi` as it appears on the wire: a K-vector or a scalar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TokenPsiOwned {
    Topic(Vec<f64>),
    Scalar(f64),
}

pub fn token_info(bundle: &SessionBundle, t: usize) -> Option<TokenInfo> {
    let (d, pos) = bundle.index.locate(t)?;
    let doc = &bundle.corpus.documents()[d];
    let tok = &doc.tokens[pos];
    Some(TokenInfo {
        doc: doc.id.clone(),
        pos,
        text: doc.slice(tok.char_start, tok.char_end).to_owned(),
        psi: match &bundle.psi[t] {
            TokenPsi::Topic(v) => TokenPsiOwned::Topic(v.clone()),
            TokenPsi::Scalar(x) => TokenPsiOwned::Scalar(*x),
        },
        color: bundle.colors[t].hex(),
    })
}

async fn token(State(s): State<Shared>, Path(i): Path<usize>) -> Response {
    match token_info(&s.bundle, i) {
        Some(info) => Json(info).into_response(),
        None => not_found(format!("token {i} out of range (0..{})", s.bundle.index.len())),
    }
}

#[derive(Deserialize)]
struct PassageQuery {
    token: usize,
    #[serde(default)]
    window: usize,
}

async fn passage(State(s): State<Shared>, Query(q): Query<PassageQuery>) -> Response {
    match s.bundle.passage(q.token, q.window) {
        Ok(p) => Json(json!({
            "doc": p.doc_id,
            "pos": p.position,
            "token": q.token,
            "tokenRange": [p.token_range.start, p.token_range.end],
            "html": p.html,
        }))
        .into_response(),
        Err(e) => not_found(e.to_string()),
    }
}

async fn topics(State(s): State<Shared>) -> Response {
    let BundleModel::Topic { file, palette } = &s.bundle.model else {
        return not_found("topics are only available for topic models".into());
    };
    let list: Vec<_> = (0..file.k)
        .map(|k| {
            let words = top_words(&file.phi_mean, &file.vocab, k, 10).unwrap_or_default();
            json!({ "topic": k, "color": palette.colors()[k], "words": words })
        })
        .collect();
    Json(list).into_response()
}

async fn docs(State(s): State<Shared>) -> Json<Vec<serde_json::Value>> {
    let b = &s.bundle;
    Json(
        b.corpus
            .documents()
            .iter()
            .enumerate()
            .map(|(d, doc)| {
                let range = b.index.doc_range(d);
                json!({
                    "id": doc.id,
                    "orderKey": doc.order_key,
                    "label": doc.label,
                    "firstToken": range.start,
                    "modeledTokens": range.len(),
                })
            })
            .collect(),
    )
}
