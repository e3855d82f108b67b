//! WebSocket service: one [`Session`] per connection, frames at a fixed
//! cadence and after every accepted change.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use multilayout_core::config::EngineConfig;
use tokio::net::TcpListener;
use tokio::time::MissedTickBehavior;

use crate::protocol::{ErrorCode, FrameFormat, ServerMessage};
use crate::registry::GraphRegistry;
use crate::session::{Condition, Session, WireFrame};

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub port: u16,
    pub graph_dir: Option<PathBuf>,
    /// Frames per second per session.
    pub frame_rate: f64,
    pub frame_format: FrameFormat,
    pub condition: Condition,
    /// Where each session's telemetry CSV is written when it disconnects.
    pub telemetry_dir: Option<PathBuf>,
    pub engine: EngineConfig,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            port: 8080,
            graph_dir: None,
            frame_rate: 30.0,
            frame_format: FrameFormat::Binary,
            condition: Condition::Multi,
            telemetry_dir: None,
            engine: EngineConfig::default(),
        }
    }
}

#[derive(Clone)]
struct AppState {
    config: Arc<ServerConfig>,
    registry: Arc<GraphRegistry>,
    next_id: Arc<AtomicU64>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

pub fn router(config: ServerConfig) -> Router {
    let state = AppState {
        registry: Arc::new(GraphRegistry::new(config.graph_dir.clone())),
        config: Arc::new(config),
        next_id: Arc::new(AtomicU64::new(1)),
    };
    Router::new()
        .route("/ws", get(upgrade))
        .route("/graphs", get(graphs))
        .route("/health", get(|| async { "ok" }))
        .with_state(state)
}

/// Binds the listener and returns its address with the serving future.
pub async fn bind(
    config: ServerConfig,
) -> std::io::Result<(SocketAddr, impl std::future::Future<Output = std::io::Result<()>>)> {
    let listener = TcpListener::bind(("0.0.0.0", config.port)).await?;
    let addr = listener.local_addr()?;
    let app = router(config);
    Ok((addr, async move { axum::serve(listener, app).await }))
}

pub async fn serve(config: ServerConfig) -> std::io::Result<()> {
    let (addr, server) = bind(config).await?;
    tracing::info!(%addr, "listening");
    server.await
}

async fn graphs(State(state): State<AppState>) -> impl IntoResponse {
    Json(state.registry.available())
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| connection(socket, state))
}

fn text(msg: &ServerMessage) -> Message {
    Message::Text(serde_json::to_string(msg).expect("messages serialize").into())
}

fn wire(frame: WireFrame) -> Message {
    match frame {
        WireFrame::Binary(b) => Message::Binary(b.into()),
        WireFrame::Text(t) => Message::Text(t.into()),
    }
}

async fn connection(socket: WebSocket, state: AppState) {
    let id = state.next_id.fetch_add(1, Ordering::Relaxed);
    let cfg = &state.config;
    let mut session = Session::new(
        id,
        Arc::clone(&state.registry),
        cfg.engine.clone(),
        cfg.condition,
        cfg.frame_format,
        unix_now(),
    );
    tracing::info!(session = id, "connected");
    let (mut sink, mut stream) = socket.split();
    if sink.send(text(&session.hello())).await.is_err() {
        return;
    }

    let period = Duration::from_secs_f64(1.0 / cfg.frame_rate.max(1.0));
    let mut ticker = tokio::time::interval(period);
    // a slow client gets the latest frame, not a backlog
    ticker.set_missed_tick_behavior(MissedTickBehavior::Skip);
    let mut last = Instant::now();

    loop {
        let outgoing: Vec<Message> = tokio::select! {
            incoming = stream.next() => match incoming {
                Some(Ok(Message::Text(t))) => {
                    let out = tokio::task::block_in_place(|| session.handle_text(t.as_str(), unix_now()));
                    let mut msgs: Vec<Message> = out.replies.iter().map(text).collect();
                    if out.changed {
                        if let Some(f) = session.frame(0.0) {
                            msgs.push(wire(session.encode(&f)));
                        }
                    }
                    msgs
                }
                Some(Ok(Message::Binary(_))) => vec![text(&ServerMessage::error(
                    None,
                    ErrorCode::BadRequest,
                    "commands are JSON text messages",
                ))],
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => Vec::new(),
            },
            _ = ticker.tick() => {
                let dt = last.elapsed().as_secs_f64();
                last = Instant::now();
                match session.frame(dt) {
                    Some(f) => vec![wire(session.encode(&f))],
                    None => Vec::new(),
                }
            }
        };
        let mut failed = false;
        for m in outgoing {
            if sink.send(m).await.is_err() {
                failed = true;
                break;
            }
        }
        if failed {
            break;
        }
    }

    if let Some(dir) = &cfg.telemetry_dir {
        let path = dir.join(format!("session-{id}.csv"));
        if let Err(e) = std::fs::write(&path, session.log().to_csv(unix_now())) {
            tracing::warn!(session = id, path = %path.display(), "telemetry not written: {e}");
        }
    }
    tracing::info!(session = id, "disconnected");
}
