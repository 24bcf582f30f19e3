//! HTTP sessions over Hydra battles: create a battle, chop heads, undo,
//! and export the log. State is plain JSON; clients poll after each move.

pub mod api;
pub mod ids;
pub mod session;
pub mod snapshot;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;
use tokio::net::TcpListener;

pub use api::{router, AppState};
pub use session::{ChopOutcome, Session, SessionError, StateView, Substep};
pub use snapshot::SnapshotError;

pub const DEFAULT_PORT: u16 = 7445;

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub addr: SocketAddr,
    pub snapshot: Option<PathBuf>,
    pub snapshot_interval: Duration,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            addr: SocketAddr::from(([127, 0, 0, 1], DEFAULT_PORT)),
            snapshot: None,
            snapshot_interval: Duration::from_secs(30),
        }
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

/// Serves until `shutdown` resolves, then writes a final snapshot.
pub async fn serve_on(
    listener: TcpListener,
    state: AppState,
    interval: Duration,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    let ticker = {
        let state = state.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(interval);
            tick.tick().await;
            loop {
                tick.tick().await;
                if let Err(e) = state.persist().await {
                    eprintln!("snapshot failed: {e}");
                }
            }
        })
    };
    let served = axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown)
        .await;
    ticker.abort();
    state.persist().await?;
    served.map_err(ServiceError::Io)
}

/// Binds `cfg.addr`, restores the snapshot and serves until SIGTERM or
/// Ctrl-C.
pub async fn serve(cfg: ServeConfig) -> Result<(), ServiceError> {
    let state = AppState::restore(cfg.snapshot.clone())?;
    let listener = TcpListener::bind(cfg.addr)
        .await
        .map_err(|source| ServiceError::Bind {
            addr: cfg.addr,
            source,
        })?;
    eprintln!("listening on {}", listener.local_addr()?);
    serve_on(listener, state, cfg.snapshot_interval, shutdown_signal()).await
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}
