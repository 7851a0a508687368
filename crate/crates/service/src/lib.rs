//! HTTP JSON API over a phonetic index: lookup, normalization,
//! perturbation, timelines and stats, with bearer-token auth, an LRU
//! response cache and atomic index reload.

pub mod api;
pub mod cache;
pub mod config;
pub mod error;
mod params;
mod routes;
pub mod state;

use std::sync::Arc;
use std::time::Duration;

pub use config::ApiConfig;
pub use error::ApiError;
pub use routes::router;
pub use state::{AppState, Generation, Resources};

/// Loads the configured artifacts and serves until interrupted.
pub async fn serve(cfg: ApiConfig) -> pertext_core::Result<()> {
    let state = {
        let cfg = cfg.clone();
        tokio::task::spawn_blocking(move || AppState::from_config(&cfg))
            .await
            .expect("startup task")?
    };
    let state = Arc::new(state);
    if cfg.watch_interval_secs > 0 {
        state::spawn_watcher(state.clone(), Duration::from_secs(cfg.watch_interval_secs));
    }
    if cfg.token.is_none() {
        tracing::warn!("no API token configured; /api routes are open");
    }
    let listener = tokio::net::TcpListener::bind(cfg.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
