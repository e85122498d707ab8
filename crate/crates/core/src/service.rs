//! HTTP inference endpoints.
//!
//! * `POST /chat` with `{"text": "...", "beam_width": 3, "trace": true}`
//!   returns `{"response": "...", "steps": [...], "model_id": "..."}`.
//!   `steps` is present only when `trace` is true; each step carries
//!   `position`, `char`, `probability` and the five most likely `top5`
//!   alternatives. The EOS class is spelled `<EOS>`.
//! * `GET /render?input=...&partial=...` returns the PNG of that image.
//! * `GET /healthz` returns `{"status": "ok", "model_id": "..."}`, or 503
//!   when no model is loaded.
//!
//! Every 4xx/5xx body is `{"error": "..."}`.

use std::future::Future;
use std::sync::{Arc, RwLock};
use std::time::Instant;

use axum::body::{Body, Bytes};
use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::CorsLayer;

use crate::decoder::{
    decode_beam, decode_greedy, trace_sequence, BeamOptions, CnnPredictor, DecodeError, DecodeStep, NextCharModel,
};

#[derive(Debug, Clone, Deserialize)]
pub struct ChatRequest {
    pub text: String,
    #[serde(default)]
    pub beam_width: Option<usize>,
    #[serde(default)]
    pub trace: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    pub char: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepView {
    pub position: usize,
    pub char: String,
    pub probability: f64,
    pub top5: Vec<Alternative>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<StepView>>,
    pub model_id: String,
}

/// A loaded model and the id it is served under.
pub struct Engine {
    predictor: CnnPredictor,
    model_id: String,
}

impl Engine {
    pub fn new(predictor: CnnPredictor) -> Self {
        let model_id = predictor.checkpoint().fingerprint();
        Engine { predictor, model_id }
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn predictor(&self) -> &CnnPredictor {
        &self.predictor
    }

    pub fn chat(&self, req: &ChatRequest) -> Result<ChatResponse, DecodeError> {
        let input: Vec<char> = req.text.chars().collect();
        let want_trace = req.trace.unwrap_or(false);
        let p = &self.predictor;
        let (response, steps) = match req.beam_width {
            None => {
                let d = decode_greedy(p, &input)?;
                (d.text, want_trace.then_some(d.steps))
            }
            Some(width) => {
                let b = decode_beam(p, &input, width, BeamOptions::default())?;
                let steps = if want_trace {
                    Some(trace_sequence(p, &input, &b.best.partial)?)
                } else {
                    None
                };
                (b.text, steps)
            }
        };
        Ok(ChatResponse {
            response,
            steps: steps.map(|s| s.iter().map(|st| self.view(st)).collect()),
            model_id: self.model_id.clone(),
        })
    }

    fn view(&self, step: &DecodeStep) -> StepView {
        let p = &self.predictor;
        StepView {
            position: step.position,
            char: p.class_label(step.chosen_class),
            probability: step.probability,
            top5: step
                .top_k
                .iter()
                .take(5)
                .map(|&(c, prob)| Alternative {
                    char: p.class_label(c),
                    probability: prob,
                })
                .collect(),
        }
    }
}

/// Shared server state. The engine slot can be swapped atomically; each
/// request works on the snapshot it took at its start.
pub struct AppState {
    renderer: crate::render::Renderer,
    engine: RwLock<Option<Arc<Engine>>>,
}

impl AppState {
    pub fn new(renderer: crate::render::Renderer, engine: Option<Engine>) -> Arc<Self> {
        Arc::new(AppState {
            renderer,
            engine: RwLock::new(engine.map(Arc::new)),
        })
    }

    pub fn engine(&self) -> Option<Arc<Engine>> {
        self.engine.read().unwrap().clone()
    }

    pub fn set_engine(&self, engine: Option<Engine>) {
        *self.engine.write().unwrap() = engine.map(Arc::new);
    }
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn decode_status(e: &DecodeError) -> StatusCode {
    match e {
        DecodeError::EmptyInput | DecodeError::InputOverflow { .. } | DecodeError::BeamWidth => StatusCode::BAD_REQUEST,
        DecodeError::Render(crate::render::RenderError::Overflow { .. }) => StatusCode::BAD_REQUEST,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

async fn chat(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let req: ChatRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed request body: {e}")),
    };
    let Some(engine) = state.engine() else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "no model loaded");
    };
    match tokio::task::spawn_blocking(move || engine.chat(&req)).await {
        Ok(Ok(resp)) => Json(resp).into_response(),
        Ok(Err(e)) => error(decode_status(&e), e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, format!("decode task failed: {e}")),
    }
}

#[derive(Debug, Deserialize)]
struct RenderQuery {
    #[serde(default)]
    input: String,
    #[serde(default)]
    partial: String,
}

async fn render_png(State(state): State<Arc<AppState>>, query: Result<Query<RenderQuery>, QueryRejection>) -> Response {
    let Query(q) = match query {
        Ok(q) => q,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.body_text()),
    };
    let png = state
        .renderer
        .render_str(&q.input, &q.partial)
        .and_then(|img| img.encode_png());
    match png {
        Ok(bytes) => ([(header::CONTENT_TYPE, "image/png")], bytes).into_response(),
        Err(e @ crate::render::RenderError::Overflow { .. }) => error(StatusCode::BAD_REQUEST, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn healthz(State(state): State<Arc<AppState>>) -> Response {
    match state.engine() {
        Some(engine) => Json(json!({ "status": "ok", "model_id": engine.model_id() })).into_response(),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(json!({ "status": "unavailable", "error": "no model loaded" })),
        )
            .into_response(),
    }
}

async fn log_request(req: Request<Body>, next: Next) -> Response {
    let method = req.method().clone();
    let path = req.uri().path().to_string();
    let start = Instant::now();
    let resp = next.run(req).await;
    log::info!("{method} {path} {} {:.1?}", resp.status().as_u16(), start.elapsed());
    resp
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/chat", post(chat))
        .route("/render", get(render_png))
        .route("/healthz", get(healthz))
        .fallback(|| async { error(StatusCode::NOT_FOUND, "no such endpoint") })
        .with_state(state)
        .layer(middleware::from_fn(log_request))
        .layer(CorsLayer::permissive())
}

/// Serves until `shutdown` resolves, then lets in-flight requests finish.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}
