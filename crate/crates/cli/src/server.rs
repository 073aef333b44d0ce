use std::io::ErrorKind;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ksi_core::experiment::make_plan;
use ksi_core::session::{decode_session, encode_session, validate_session, Device};
use log::info;
use serde::Deserialize;
use serde_json::json;
use tokio::io::AsyncWriteExt;

use crate::config::RunConfig;

const INDEX_HTML: &str = include_str!("../assets/index.html");
const APP_JS: &str = include_str!("../assets/app.js");

#[derive(Clone)]
pub struct AppState {
    pub config: Arc<RunConfig>,
    pub data_dir: PathBuf,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/app.js", get(app_js))
        .route("/plan", get(plan))
        .route("/session", post(session))
        .with_state(state)
}

async fn index() -> Response {
    ([(header::CONTENT_TYPE, "text/html; charset=utf-8")], INDEX_HTML).into_response()
}

async fn app_js() -> Response {
    ([(header::CONTENT_TYPE, "text/javascript; charset=utf-8")], APP_JS).into_response()
}

#[derive(Debug, Deserialize)]
struct PlanQuery {
    device: Option<String>,
    seed: Option<u64>,
}

async fn plan(State(state): State<AppState>, Query(q): Query<PlanQuery>) -> Response {
    let device = match q.device.as_deref().map(str::parse::<Device>).transpose() {
        Ok(d) => d.unwrap_or(Device::Mouse),
        Err(e) => return (StatusCode::BAD_REQUEST, Json(json!({ "errors": [e] }))).into_response(),
    };
    let seed = q.seed.unwrap_or(state.config.seed);
    match make_plan(device, &state.config.plan_spec(), seed) {
        Ok(plan) => Json(plan).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, Json(json!({ "errors": [e.to_string()] }))).into_response(),
    }
}

fn safe_name(s: &str) -> String {
    let cleaned: String =
        s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).take(64).collect();
    if cleaned.is_empty() {
        "anonymous".into()
    } else {
        cleaned
    }
}

/// Accepts a whole `.ksi.jsonl` file. Undecodable bodies get 400, decoded
/// sessions with rule violations get 422, and valid sessions are stored
/// under a new file name in the data directory.
async fn session(State(state): State<AppState>, body: String) -> Response {
    let log = match decode_session(body.lines()) {
        Ok(log) => log,
        Err(e) => return (StatusCode::BAD_REQUEST, Json(json!({ "errors": [e.to_string()] }))).into_response(),
    };
    let violations = validate_session(&log);
    if !violations.is_empty() {
        return (StatusCode::UNPROCESSABLE_ENTITY, Json(json!({ "violations": violations }))).into_response();
    }
    let millis = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    let stem = format!("{millis}_{}", safe_name(&log.meta.participant_id));
    let text = encode_session(&log);
    if let Err(e) = tokio::fs::create_dir_all(&state.data_dir).await {
        return (StatusCode::INTERNAL_SERVER_ERROR, Json(json!({ "errors": [e.to_string()] }))).into_response();
    }
    for attempt in 0u32.. {
        let name = if attempt == 0 { format!("{stem}.ksi.jsonl") } else { format!("{stem}-{attempt}.ksi.jsonl") };
        let path = state.data_dir.join(&name);
        let file = tokio::fs::OpenOptions::new().write(true).create_new(true).open(&path).await;
        match file {
            Ok(mut f) => {
                let written = async {
                    f.write_all(text.as_bytes()).await?;
                    f.flush().await
                };
                if let Err(e) = written.await {
                    return (StatusCode::INTERNAL_SERVER_ERROR, Json(json!({ "errors": [e.to_string()] })))
                        .into_response();
                }
                info!("stored {name} ({} events)", log.events.len());
                return Json(json!({ "stored": name, "events": log.events.len() })).into_response();
            }
            Err(e) if e.kind() == ErrorKind::AlreadyExists => continue,
            Err(e) => {
                return (StatusCode::INTERNAL_SERVER_ERROR, Json(json!({ "errors": [e.to_string()] }))).into_response()
            }
        }
    }
    unreachable!("file name attempts are unbounded")
}
