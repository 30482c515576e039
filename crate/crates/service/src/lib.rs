//! Streaming endpoint for live enhancement sessions.
//!
//! * `GET /session` upgrades to a WebSocket carrying JSON control messages
//!   and binary audio chunks.
//! * `POST /upload` takes a 16 kHz stereo WAV body and returns an id that
//!   sessions can open.
//! * `GET /demos` lists the built-in scenes.
//!
//! The message schema is described in `docs/protocol.md`.

pub mod demos;
pub mod protocol;
pub mod session;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State, WebSocketUpgrade};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dualmic_core::wav::read_wav_bytes;
use dualmic_core::AudioBuffer;
use serde_json::json;
use tokio::net::TcpListener;

use crate::demos::Demo;
use crate::protocol::DemoInfo;

const SAMPLE_RATE: u32 = 16_000;
const MAX_UPLOAD_BYTES: usize = 64 << 20;

#[derive(Clone)]
pub struct AppState {
    demos: Arc<Vec<Demo>>,
    uploads: Arc<Mutex<HashMap<String, Arc<AudioBuffer>>>>,
}

impl AppState {
    /// Synthesizes the demo scenes.
    pub fn new() -> Self {
        Self {
            demos: Arc::new(demos::builtin()),
            uploads: Arc::default(),
        }
    }

    pub fn demo(&self, name: &str) -> Option<&Demo> {
        self.demos.iter().find(|d| d.info.name == name)
    }

    pub fn upload(&self, id: &str) -> Option<Arc<AudioBuffer>> {
        self.uploads.lock().expect("upload table").get(id).cloned()
    }
}

impl Default for AppState {
    fn default() -> Self {
        Self::new()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/session", get(session_handler))
        .route("/upload", post(upload_handler))
        .route("/demos", get(demos_handler))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

async fn session_handler(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| session::run(socket, state))
}

async fn demos_handler(State(state): State<AppState>) -> Json<Vec<DemoInfo>> {
    Json(state.demos.iter().map(|d| d.info.clone()).collect())
}

fn refuse(error: &str, detail: String) -> Response {
    (StatusCode::BAD_REQUEST, Json(json!({ "error": error, "detail": detail }))).into_response()
}

async fn upload_handler(State(state): State<AppState>, body: Bytes) -> Response {
    let audio = match read_wav_bytes(&body) {
        Ok(a) => a,
        Err(e) => return refuse("format", e.to_string()),
    };
    if audio.sample_rate != SAMPLE_RATE {
        return refuse(
            "sample_rate",
            format!("expected {SAMPLE_RATE} Hz, got {} Hz", audio.sample_rate),
        );
    }
    if audio.channels.len() != 2 {
        return refuse(
            "channels",
            format!("expected 2 channels, got {}", audio.channels.len()),
        );
    }
    if audio.is_empty() {
        return refuse("format", "no samples".into());
    }
    let id = uuid::Uuid::new_v4().to_string();
    let samples = audio.len();
    state
        .uploads
        .lock()
        .expect("upload table")
        .insert(id.clone(), Arc::new(audio));
    (StatusCode::CREATED, Json(json!({ "upload_id": id, "samples": samples }))).into_response()
}
