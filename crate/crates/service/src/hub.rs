//! HTTP and websocket front end. Each session runs in its own task that
//! owns a [`SessionActor`]; connections and timers feed it through a channel.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use facework_core::config::ItemSpec;
use facework_core::session::EventLogWriter;
use facework_core::TimingConfig;
use serde::{Deserialize, Serialize};
use tokio::sync::mpsc;
use tokio::time::Instant;
use uuid::Uuid;

use crate::actor::{Outbound, SessionActor};
use crate::protocol::{ClientMessage, ErrorCode, ServerMessage};
use crate::registry::VariantRegistry;
use crate::ServiceError;

#[derive(Debug, Clone)]
pub struct HubConfig {
    pub log_dir: PathBuf,
    /// Replaces the seed of every created session when set.
    pub seed_override: Option<u64>,
}

enum Command {
    Attach {
        conn: u64,
        tx: mpsc::UnboundedSender<ServerMessage>,
    },
    Client {
        conn: u64,
        text: String,
    },
    Detach {
        conn: u64,
    },
}

#[derive(Clone)]
pub struct Hub {
    inner: Arc<HubInner>,
}

struct HubInner {
    registry: VariantRegistry,
    config: HubConfig,
    sessions: Mutex<HashMap<Uuid, mpsc::UnboundedSender<Command>>>,
    next_conn: std::sync::atomic::AtomicU64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSession {
    pub variant_id: String,
    pub facework: bool,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionCreated {
    pub token: Uuid,
    pub log_file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant_id: String,
    pub title: String,
    pub items: Vec<ItemSpec>,
    pub timing: TimingConfig,
}

impl Hub {
    pub fn new(registry: VariantRegistry, config: HubConfig) -> Self {
        Self {
            inner: Arc::new(HubInner {
                registry,
                config,
                sessions: Mutex::new(HashMap::new()),
                next_conn: 0.into(),
            }),
        }
    }

    pub fn registry(&self) -> &VariantRegistry {
        &self.inner.registry
    }

    /// Starts a session task and creates its event log file. Must be called
    /// from within a tokio runtime.
    pub fn create_session(&self, req: &CreateSession) -> Result<SessionCreated, ServiceError> {
        let variant = self
            .inner
            .registry
            .get(&req.variant_id)
            .ok_or_else(|| ServiceError::UnknownVariant(req.variant_id.clone()))?;
        let token = Uuid::new_v4();
        let seed = self.inner.config.seed_override.unwrap_or(req.seed);
        std::fs::create_dir_all(&self.inner.config.log_dir)?;
        let log_file = format!("{token}.jsonl");
        let writer = EventLogWriter::create(self.inner.config.log_dir.join(&log_file))?;
        let actor = SessionActor::new(variant, req.facework, seed, Some(writer));

        let (tx, rx) = mpsc::unbounded_channel();
        self.inner
            .sessions
            .lock()
            .expect("session map poisoned")
            .insert(token, tx);
        tokio::spawn(run_session(actor, rx));
        tracing::info!(%token, variant = %req.variant_id, facework = req.facework, seed, "session created");
        Ok(SessionCreated { token, log_file })
    }

    fn session(&self, token: &str) -> Option<mpsc::UnboundedSender<Command>> {
        let token = Uuid::parse_str(token).ok()?;
        self.inner
            .sessions
            .lock()
            .expect("session map poisoned")
            .get(&token)
            .cloned()
    }

    pub fn router(&self) -> Router {
        Router::new()
            .route("/api/sessions", post(create_session))
            .route("/api/variants", get(list_variants))
            .route("/ws", get(ws_upgrade))
            .with_state(self.clone())
    }
}

async fn run_session(mut actor: SessionActor, mut rx: mpsc::UnboundedReceiver<Command>) {
    let start = Instant::now();
    let now = move || start.elapsed().as_millis() as u64;
    let mut conns: HashMap<u64, mpsc::UnboundedSender<ServerMessage>> = HashMap::new();

    loop {
        let deadline = actor
            .next_deadline()
            .map(|ms| start + std::time::Duration::from_millis(ms));
        let (from, out) = tokio::select! {
            cmd = rx.recv() => match cmd {
                None => break,
                Some(Command::Attach { conn, tx }) => {
                    for m in actor.welcome() {
                        let _ = tx.send(m);
                    }
                    conns.insert(conn, tx);
                    continue;
                }
                Some(Command::Detach { conn }) => {
                    conns.remove(&conn);
                    continue;
                }
                Some(Command::Client { conn, text }) => (Some(conn), actor.handle_text(&text, now())),
            },
            _ = sleep_until(deadline) => (None, actor.on_tick(now())),
        };
        for o in out {
            match o {
                Outbound::Broadcast(m) => conns.retain(|_, tx| tx.send(m.clone()).is_ok()),
                Outbound::Reply(m) => {
                    if let Some(tx) = from.and_then(|c| conns.get(&c)) {
                        let _ = tx.send(m);
                    }
                }
            }
        }
    }
}

async fn sleep_until(deadline: Option<Instant>) {
    match deadline {
        Some(d) => tokio::time::sleep_until(d).await,
        None => std::future::pending().await,
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self {
            ServiceError::UnknownVariant(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (
            status,
            Json(serde_json::json!({ "error": self.to_string() })),
        )
            .into_response()
    }
}

async fn create_session(
    State(hub): State<Hub>,
    Json(req): Json<CreateSession>,
) -> Result<Json<SessionCreated>, ServiceError> {
    hub.create_session(&req).map(Json)
}

async fn list_variants(State(hub): State<Hub>) -> Json<Vec<VariantSummary>> {
    Json(
        hub.registry()
            .iter()
            .map(|v| VariantSummary {
                variant_id: v.variant_id.clone(),
                title: v.title.clone(),
                items: v.items.clone(),
                timing: v.timing,
            })
            .collect(),
    )
}

async fn ws_upgrade(State(hub): State<Hub>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| connection(hub, socket))
}

async fn send(socket: &mut WebSocket, msg: &ServerMessage) -> bool {
    socket
        .send(Message::Text(msg.to_json().into()))
        .await
        .is_ok()
}

/// Waits for `hello`, then relays in both directions until either side closes.
async fn connection(hub: Hub, mut socket: WebSocket) {
    let session = loop {
        let Some(Ok(msg)) = socket.recv().await else {
            return;
        };
        let text = match msg {
            Message::Text(t) => t,
            Message::Close(_) => return,
            _ => continue,
        };
        match serde_json::from_str::<ClientMessage>(text.as_str()) {
            Ok(ClientMessage::Hello { token }) => match hub.session(&token) {
                Some(s) => break s,
                None => {
                    let err = ServerMessage::error(
                        ErrorCode::UnknownSession,
                        format!("no session {token}"),
                    );
                    if !send(&mut socket, &err).await {
                        return;
                    }
                }
            },
            Ok(_) => {
                let err = ServerMessage::error(ErrorCode::Protocol, "send hello first");
                if !send(&mut socket, &err).await {
                    return;
                }
            }
            Err(e) => {
                if !send(
                    &mut socket,
                    &ServerMessage::error(ErrorCode::Protocol, e.to_string()),
                )
                .await
                {
                    return;
                }
            }
        }
    };

    let conn = hub
        .inner
        .next_conn
        .fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    let (tx, mut outbound) = mpsc::unbounded_channel();
    if session.send(Command::Attach { conn, tx }).is_err() {
        return;
    }
    loop {
        tokio::select! {
            msg = outbound.recv() => match msg {
                Some(m) => if !send(&mut socket, &m).await { break },
                None => break,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(t))) => {
                    if session.send(Command::Client { conn, text: t.to_string() }).is_err() {
                        break;
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
    let _ = session.send(Command::Detach { conn });
}
