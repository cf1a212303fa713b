//! HTTP API.
//!
//! All payloads are JSON and carry `"schema": "hybridsearch/v1"`.
//!
//! - `GET /health`: index sizes, projection seed, alpha_doc, dimensions,
//!   encoder mode and the default search parameters.
//! - `POST /search`: one query, by text (toy-encoder indices only) or by
//!   explicit `dense` / `sparse` vectors, with per-request overrides.
//! - `POST /evaluate`: runs uploaded queries and TREC qrels text, returns the
//!   metric report.
//! - `POST /bench`: latency comparison over uploaded queries.
//!
//! Evaluate and bench jobs run one at a time; searches run concurrently.
//! The index is read-only once the service starts.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hybridsearch_core::fusion::ild_at_k;
use hybridsearch_core::index::AlphaHyb;
use hybridsearch_core::metrics::{EvalOptions, Gain};
use hybridsearch_core::pipeline::{Method, PipelineConfig};
use hybridsearch_core::projection::AlphaMix;
use hybridsearch_core::{DenseVec, RankedList};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

use crate::error::{Error, Result};
use crate::formats::jsonl::{QueryLine, QueryRecord, SparseJson};
use crate::formats::report::metrics_json;
use crate::formats::snapshot::EncoderMode;
use crate::formats::trec;
use crate::runner::{self, BenchOptions, Timing};
use crate::store::Store;

pub const API_SCHEMA: &str = "hybridsearch/v1";
const SNIPPET_CHARS: usize = 280;

pub struct ServeConfig {
    pub listen: SocketAddr,
    pub index_dir: PathBuf,
    /// Expected projection seed; startup fails when the index disagrees.
    pub seed: Option<u64>,
    pub defaults: PipelineConfig,
}

pub struct AppState {
    pub store: Store,
    pub defaults: PipelineConfig,
    jobs: tokio::sync::Mutex<()>,
}

impl AppState {
    pub fn new(store: Store, defaults: PipelineConfig) -> Result<Self> {
        defaults.validate()?;
        Ok(Self {
            store,
            defaults,
            jobs: tokio::sync::Mutex::new(()),
        })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/search", post(search))
        .route("/evaluate", post(evaluate))
        .route("/bench", post(bench))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Loads the index, checks the seed and serves until Ctrl-C.
pub async fn serve(config: ServeConfig) -> anyhow::Result<()> {
    let store = Store::open(&config.index_dir, config.seed)?;
    let state = Arc::new(AppState::new(store, config.defaults)?);
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    tracing::info!(
        addr = %listener.local_addr()?,
        docs = state.store.hybrid.len(),
        seed = state.store.meta.seed,
        "listening"
    );
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

impl From<hybridsearch_core::Error> for ApiError {
    fn from(e: hybridsearch_core::Error) -> Self {
        Error::from(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({"schema": API_SCHEMA, "error": self.message})),
        )
            .into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        message: format!("worker failed: {e}"),
    })?
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Value> {
    let s = &state.store;
    let d = &state.defaults;
    tracing::info!(route = "/health", "request");
    Json(json!({
        "schema": API_SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "docs": {"hybrid": s.hybrid.len(), "fused": s.fused.len()},
        "seed": s.meta.seed,
        "alpha_doc": s.meta.alpha_doc,
        "dense_dim": s.meta.dense_dim,
        "vocab_dim": s.meta.vocab_dim,
        "encoder": s.meta.encoder,
        "methods": Method::ALL.iter().map(|m| json!({"name": m.name(), "label": m.label()})).collect::<Vec<_>>(),
        "defaults": params_json(d, s.meta.alpha_doc),
    }))
}

/// Per-request parameter overrides shared by all endpoints.
#[derive(Debug, Default, Deserialize)]
pub struct Overrides {
    pub method: Option<String>,
    pub top_k: Option<usize>,
    pub candidates_k: Option<usize>,
    pub alpha_query: Option<f64>,
    pub alpha_hyb: Option<f64>,
    pub lambda: Option<f64>,
    pub mmr_pool: Option<usize>,
}

impl Overrides {
    pub fn resolve(&self, defaults: &PipelineConfig) -> Result<PipelineConfig> {
        let mut cfg = defaults.clone();
        if let Some(m) = &self.method {
            cfg.method = m.parse()?;
        }
        if let Some(k) = self.top_k {
            cfg.output_k = k;
            if self.candidates_k.is_none() {
                cfg.candidates_k = cfg.candidates_k.max(k);
            }
        }
        if let Some(c) = self.candidates_k {
            cfg.candidates_k = c;
        }
        if let Some(a) = self.alpha_query {
            cfg.alpha_query = AlphaMix::query(a)?;
        }
        if let Some(a) = self.alpha_hyb {
            if !matches!(cfg.method, Method::Sparse | Method::Dense) {
                return Err(Error::Invalid(format!(
                    "alpha_hyb applies to the sparse and dense methods, not {}",
                    cfg.method
                )));
            }
            cfg.alpha_hyb = Some(AlphaHyb::new(a)?);
        }
        if let Some(l) = self.lambda {
            cfg.mmr.lambda = l;
        }
        if let Some(p) = self.mmr_pool {
            cfg.mmr.pool_size = p;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn params_json(cfg: &PipelineConfig, alpha_doc: f64) -> Value {
    json!({
        "method": cfg.method.name(),
        "label": cfg.method.label(),
        "top_k": cfg.output_k,
        "candidates_k": cfg.candidates_k,
        "alpha_query": cfg.alpha_query.value(),
        "alpha_doc": alpha_doc,
        "alpha_hyb": cfg.alpha_hyb.map(|a| a.value()),
        "lambda": cfg.mmr.lambda,
        "mmr_pool": cfg.mmr.pool_size,
        "rrf_k": cfg.rrf.k,
        "rrf_weights": cfg.rrf.weights,
    })
}

#[derive(Debug, Deserialize)]
pub struct SearchRequest {
    #[serde(default)]
    pub query_id: Option<String>,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub dense: Option<Vec<f32>>,
    #[serde(default)]
    pub sparse: Option<SparseJson>,
    #[serde(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Serialize)]
pub struct SearchResult {
    pub rank: u32,
    pub doc_id: String,
    pub title: String,
    pub snippet: String,
    pub score: f64,
}

#[derive(Debug, Serialize)]
pub struct SearchResponse {
    pub schema: &'static str,
    pub query_id: String,
    pub params: Value,
    pub results: Vec<SearchResult>,
    pub timing: Timing,
    pub ild_at_10: f64,
    pub ild_degenerate: bool,
}

fn snippet(text: &str) -> String {
    if text.chars().count() <= SNIPPET_CHARS {
        return text.to_string();
    }
    let cut: String = text.chars().take(SNIPPET_CHARS).collect();
    let cut = match cut.rfind(' ') {
        Some(i) if i > SNIPPET_CHARS / 2 => &cut[..i],
        _ => &cut,
    };
    format!("{}...", cut.trim_end())
}

fn query_record(state: &AppState, req: SearchRequest, cfg: &PipelineConfig) -> Result<QueryRecord> {
    let meta = &state.store.meta;
    let line = QueryLine {
        query_id: req.query_id.unwrap_or_else(|| "query".into()),
        text: req.text,
        dense: req.dense,
        sparse: req.sparse,
    };
    let record = line
        .into_record(meta.dense_dim, meta.vocab_dim)
        .map_err(Error::Invalid)?;
    let (need_dense, need_sparse) = cfg.required_vectors();
    let missing = (need_dense && record.dense.is_none()) || (need_sparse && record.sparse.is_none());
    if missing {
        if meta.encoder == EncoderMode::Precomputed {
            return Err(Error::Invalid(format!(
                "this index was built from precomputed vectors, so the service does not encode text; \
                 send the query's \"dense\" ({} floats) and \"sparse\" ({{indices, values}}) vectors \
                 produced by the same encoders as the corpus",
                meta.dense_dim
            )));
        }
        if record.text.trim().is_empty() {
            return Err(Error::Invalid("send query \"text\" or explicit vectors".into()));
        }
    }
    Ok(record)
}

pub fn respond(state: &AppState, cfg: &PipelineConfig, list: RankedList, timing: Timing) -> Result<SearchResponse> {
    let hybrid = &state.store.hybrid;
    let mut vectors = Vec::with_capacity(list.len());
    let mut results = Vec::with_capacity(list.len());
    for hit in &list.hits {
        let meta = hybrid.meta(&hit.doc_id);
        if let Some(v) = hybrid.dense_slice(&hit.doc_id) {
            vectors.push(DenseVec::new(v.to_vec())?);
        }
        results.push(SearchResult {
            rank: hit.rank,
            doc_id: hit.doc_id.clone(),
            title: meta.map(|m| m.title.clone()).unwrap_or_default(),
            snippet: meta.map(|m| snippet(&m.abstract_text)).unwrap_or_default(),
            score: hit.score,
        });
    }
    let ild = ild_at_k(&vectors, 10)?;
    Ok(SearchResponse {
        schema: API_SCHEMA,
        query_id: list.query_id,
        params: params_json(cfg, state.store.meta.alpha_doc),
        results,
        timing,
        ild_at_10: ild.value,
        ild_degenerate: ild.degenerate,
    })
}

async fn search(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<SearchResponse>> {
    let req: SearchRequest = parse_body(&body)?;
    let response = blocking(move || {
        let cfg = req.overrides.resolve(&state.defaults)?;
        let record = query_record(&state, req, &cfg)?;
        let (list, timing) = state.store.searcher().run_query(&cfg, &record)?;
        let response = respond(&state, &cfg, list, timing)?;
        tracing::info!(
            route = "/search",
            method = cfg.method.name(),
            params = %response.params,
            total_ms = timing.total_ms,
            "request"
        );
        Ok(response)
    })
    .await?;
    Ok(Json(response))
}

#[derive(Debug, Deserialize)]
pub struct EvaluateRequest {
    pub queries: Vec<QueryLine>,
    /// TREC qrels text: `query_id 0 doc_id grade` per line.
    pub qrels: String,
    #[serde(default)]
    pub cutoff: Option<usize>,
    #[serde(flatten)]
    pub overrides: Overrides,
}

fn records(state: &AppState, lines: Vec<QueryLine>) -> Result<Vec<QueryRecord>> {
    let meta = &state.store.meta;
    lines
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            l.into_record(meta.dense_dim, meta.vocab_dim)
                .map_err(|e| Error::Invalid(format!("queries[{i}]: {e}")))
        })
        .collect()
}

async fn evaluate(State(shared): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: EvaluateRequest = parse_body(&body)?;
    let _job = shared.jobs.lock().await;
    let state = Arc::clone(&shared);
    let start = Instant::now();
    let out = blocking(move || {
        let cfg = req.overrides.resolve(&state.defaults)?;
        let queries = records(&state, req.queries)?;
        let qrels = trec::parse_qrels(&req.qrels, "qrels")?;
        let options = EvalOptions {
            cutoff: req.cutoff.unwrap_or(10),
            gain: Gain::Linear,
        };
        let (batch, report) = state.store.searcher().evaluate(&cfg, &queries, &qrels, options)?;
        let value = json!({
            "schema": API_SCHEMA,
            "params": params_json(&cfg, state.store.meta.alpha_doc),
            "report": metrics_json(&report),
            "failures": batch.failures,
            "latency": batch.latency.map(|l| json!({"avg_ms": l.avg, "p95_ms": l.p95})),
        });
        Ok((cfg.method, value))
    })
    .await?;
    tracing::info!(
        route = "/evaluate",
        method = out.0.name(),
        total_ms = start.elapsed().as_secs_f64() * 1000.0,
        "request"
    );
    Ok(Json(out.1))
}

#[derive(Debug, Deserialize)]
pub struct BenchRequest {
    pub queries: Vec<QueryLine>,
    #[serde(default)]
    pub methods: Option<Vec<String>>,
    #[serde(default)]
    pub warmup: Option<usize>,
    #[serde(default)]
    pub rounds: Option<usize>,
    #[serde(default)]
    pub with_encoding: bool,
    #[serde(flatten)]
    pub overrides: Overrides,
}

async fn bench(State(shared): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: BenchRequest = parse_body(&body)?;
    let _job = shared.jobs.lock().await;
    let state = Arc::clone(&shared);
    let start = Instant::now();
    let value = blocking(move || {
        let cfg = req.overrides.resolve(&state.defaults)?;
        let queries = records(&state, req.queries)?;
        let mut opts = BenchOptions {
            with_encoding: req.with_encoding,
            ..BenchOptions::default()
        };
        if let Some(ms) = req.methods {
            opts.methods = ms
                .iter()
                .map(|m| m.parse::<Method>())
                .collect::<std::result::Result<_, _>>()?;
        }
        if let Some(w) = req.warmup {
            opts.warmup = w;
        }
        if let Some(r) = req.rounds {
            opts.rounds = r;
        }
        let bench = runner::bench(&state.store.searcher(), &cfg, &queries, &opts)?;
        Ok(json!({"schema": API_SCHEMA, "bench": bench}))
    })
    .await?;
    tracing::info!(
        route = "/bench",
        total_ms = start.elapsed().as_secs_f64() * 1000.0,
        "request"
    );
    Ok(Json(value))
}
