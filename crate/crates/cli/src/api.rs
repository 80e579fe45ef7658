//! HTTP/WebSocket front end over a single engine.
//!
//! - `GET /state` returns the current snapshot.
//! - `POST /command` takes command text as the body and runs it atomically. The reply is
//!   `{"ok": true, "outputs": [...], "snapshot": {...}}`, or on failure (status 422)
//!   `{"ok": false, "error": {"kind", "message", "span"}, "snapshot": {...}}`.
//! - `WS /events` first sends the current snapshot, then one message per mutating submit.
//!   Every message has the form `{"type": "snapshot", "version": n, "snapshot": {...}}`.

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use qrefine::{Engine, EngineError};
use serde_json::{json, Value};
use tokio::sync::{broadcast, Mutex};

pub struct Shared {
    /// Mutations queue on this lock; tokio's mutex grants it in FIFO order.
    engine: Mutex<Engine>,
    /// Latest published snapshot. Readers never wait on a running command.
    current: RwLock<Arc<Value>>,
    events: broadcast::Sender<Arc<Value>>,
}

impl Shared {
    pub fn new(engine: Engine) -> Arc<Shared> {
        let (events, _) = broadcast::channel(256);
        Arc::new(Shared {
            current: RwLock::new(Arc::new(event(&engine))),
            engine: Mutex::new(engine),
            events,
        })
    }

    pub fn snapshot(&self) -> Arc<Value> {
        self.current.read().expect("snapshot lock").clone()
    }

    /// Runs `text` atomically and publishes a new snapshot if anything changed.
    pub async fn submit(&self, text: &str) -> (bool, Value) {
        let mut engine = self.engine.lock().await;
        let before = engine.version();
        let result = engine.submit(text);
        if engine.version() != before {
            let ev = Arc::new(event(&engine));
            *self.current.write().expect("snapshot lock") = ev.clone();
            // No subscribers is fine.
            let _ = self.events.send(ev);
        }
        let snapshot = engine.snapshot();
        drop(engine);
        match result {
            Ok(outs) => (
                true,
                json!({ "ok": true, "outputs": outs, "snapshot": snapshot }),
            ),
            Err((e, span)) => (
                false,
                json!({
                    "ok": false,
                    "error": {
                        "kind": error_kind(&e),
                        "message": e.to_string(),
                        "span": span,
                    },
                    "snapshot": snapshot,
                }),
            ),
        }
    }
}

fn event(engine: &Engine) -> Value {
    json!({ "type": "snapshot", "version": engine.version(), "snapshot": engine.snapshot() })
}

fn error_kind(e: &EngineError) -> &'static str {
    match e {
        EngineError::Parse(_) => "parse",
        EngineError::Eval(_) => "eval",
        EngineError::Refine(_) => "refine",
        EngineError::Sem(_) => "semantics",
        EngineError::Command(_) => "command",
    }
}

pub fn router(shared: Arc<Shared>, static_dir: Option<PathBuf>) -> Router {
    let app = Router::new()
        .route("/state", get(get_state))
        .route("/command", post(post_command))
        .route("/events", get(events))
        .with_state(shared);
    match static_dir {
        Some(dir) => app.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => app,
    }
}

async fn get_state(State(shared): State<Arc<Shared>>) -> Json<Value> {
    Json(shared.snapshot()["snapshot"].clone())
}

async fn post_command(State(shared): State<Arc<Shared>>, body: String) -> Response {
    let (ok, payload) = shared.submit(&body).await;
    let status = if ok {
        StatusCode::OK
    } else {
        StatusCode::UNPROCESSABLE_ENTITY
    };
    (status, Json(payload)).into_response()
}

async fn events(ws: WebSocketUpgrade, State(shared): State<Arc<Shared>>) -> Response {
    ws.on_upgrade(move |socket| stream_events(socket, shared))
}

async fn stream_events(mut socket: WebSocket, shared: Arc<Shared>) {
    // Subscribe before reading the current snapshot so no version is missed.
    let mut rx = shared.events.subscribe();
    let first = shared.snapshot();
    let mut last = first["version"].as_u64().unwrap_or(0);
    if socket.send(Message::Text(first.to_string().into())).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            ev = rx.recv() => match ev {
                Ok(ev) => {
                    let v = ev["version"].as_u64().unwrap_or(0);
                    if v <= last {
                        continue;
                    }
                    last = v;
                    if socket.send(Message::Text(ev.to_string().into())).await.is_err() {
                        return;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(n)) => {
                    log::warn!("event subscriber lagged by {n}; resending current snapshot");
                    let cur = shared.snapshot();
                    last = cur["version"].as_u64().unwrap_or(last);
                    if socket.send(Message::Text(cur.to_string().into())).await.is_err() {
                        return;
                    }
                }
                Err(broadcast::error::RecvError::Closed) => return,
            },
            msg = socket.recv() => match msg {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}
