//! HTTP API over published corpus snapshots, plus the scheduled harvest and
//! weekly rebuild jobs.

pub mod api;
pub mod scheduler;
pub mod snapshot;

use std::net::SocketAddr;
use std::sync::Arc;

pub use api::{router, AppState, Cors, Limits, GENERATION_HEADER, SCHEMA_VERSION};
pub use scheduler::{Jobs, WeeklySchedule, DEFAULT_HARVEST_INTERVAL};
pub use snapshot::{Published, SnapshotHandle};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("binding {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("server: {0}")]
    Io(#[from] std::io::Error),
}

pub struct ServerConfig {
    pub listen: SocketAddr,
    pub jobs: Jobs,
    pub limits: Limits,
    pub cors: Cors,
}

/// Serves until ctrl-c. Loads the current snapshot if one exists; until
/// then data endpoints answer 503.
pub async fn serve(config: ServerConfig) -> Result<(), ServeError> {
    let snapshots = Arc::new(SnapshotHandle::new(&config.jobs.data_dir));
    match snapshots.refresh() {
        Ok(Some(generation)) => tracing::info!(generation, "loaded snapshot"),
        Ok(None) => tracing::warn!("no snapshot published yet; run a build"),
        Err(e) => tracing::error!(error = %e, "cannot load the current snapshot"),
    }
    let _jobs = config.jobs.spawn(snapshots.clone());
    let app = router(
        AppState {
            snapshots,
            limits: config.limits,
        },
        config.cors,
    );
    let listener = tokio::net::TcpListener::bind(config.listen)
        .await
        .map_err(|source| ServeError::Bind {
            addr: config.listen,
            source,
        })?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
