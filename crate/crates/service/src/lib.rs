//! Session host for the ranking negotiation: a websocket protocol over
//! [`facework_core`] sessions, with server-side turn-taking timers and one
//! JSONL event log per session.

pub mod actor;
pub mod animation;
pub mod hub;
pub mod protocol;
pub mod registry;

use std::net::SocketAddr;

use thiserror::Error;

pub use actor::{Activity, Outbound, SessionActor};
pub use animation::{build_animation_script, AnimationScript, Keyframe, KeyframeKind};
pub use hub::{CreateSession, Hub, HubConfig, SessionCreated};
pub use protocol::{ClientMessage, ErrorCode, ServerMessage};
pub use registry::VariantRegistry;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown variant {0:?}")]
    UnknownVariant(String),
    #[error(transparent)]
    Config(#[from] facework_core::config::ConfigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Serves `hub` on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    hub: Hub,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    let addr: SocketAddr = listener.local_addr()?;
    tracing::info!(%addr, variants = hub.registry().len(), "listening");
    axum::serve(listener, hub.router())
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}
