//! HTTP service over the engine: interactive games with annotation export,
//! board suite listings and a read-only view of stored session logs.
//!
//! All rule evaluation is delegated to [`minebench::engine`]. Responses
//! for games in play carry only the player's view, never the minefield.

mod api;
pub mod catalog;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use api::router;
pub use store::{CreatedFrom, GameHandle, Store, StoreError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServerConfig {
    pub bind: SocketAddr,
    /// Game journals go under `<data_dir>/games`. `None` keeps games in memory.
    pub data_dir: Option<PathBuf>,
    pub suites_dir: Option<PathBuf>,
    pub sessions_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: None,
            suites_dir: None,
            sessions_dir: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error("server error: {0}")]
    Serve(std::io::Error),
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

struct Inner {
    config: ServerConfig,
    store: Store,
}

impl AppState {
    /// Builds the state, replaying any journals found under `data_dir`.
    pub fn open(config: ServerConfig) -> Result<Self, StoreError> {
        let store = match &config.data_dir {
            Some(dir) => Store::open(dir)?,
            None => Store::in_memory(),
        };
        Ok(Self(Arc::new(Inner { config, store })))
    }

    pub fn store(&self) -> &Store {
        &self.0.store
    }

    pub fn config(&self) -> &ServerConfig {
        &self.0.config
    }
}

pub async fn serve(config: ServerConfig) -> Result<(), ServerError> {
    let addr = config.bind;
    let state = AppState::open(config)?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServerError::Bind { addr, source })?;
    let local = listener.local_addr().map_err(ServerError::Serve)?;
    log::info!("listening on http://{local}");
    eprintln!("minebench server listening on http://{local}");
    axum::serve(listener, router(state)).await.map_err(ServerError::Serve)
}
