//! Labeling sessions over HTTP with a person answering the queries.
//!
//! A session serves one query at a time, chosen by a query strategy over a
//! dataset's pool. Each answer is closed under strict-order deduction, the
//! answer and everything it implied are appended to a JSON-lines log, and a
//! session can be rebuilt from that log after a restart.

pub mod api;
pub mod catalog;
pub mod error;
pub mod log;
pub mod session;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

pub use api::router;
pub use catalog::{Catalog, Dataset};
pub use error::ServiceError;
pub use log::{read_log, EventSource, LabelEvent, LabelLog};
pub use session::{replay_closure, Query, Session, SessionMeta, Stats, Status, Submitted};
pub use store::{parse_strategy, CreateSession, SessionStore};

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub port: u16,
    pub data_dir: PathBuf,
    pub logs_dir: PathBuf,
    pub ui_dir: Option<PathBuf>,
}

/// Loads the datasets, restores logged sessions and serves until the process
/// is stopped.
pub async fn serve(cfg: ServeConfig) -> Result<(), ServiceError> {
    let catalog = Catalog::load(&cfg.data_dir)?;
    let store = SessionStore::new(catalog, &cfg.logs_dir)?;
    let restored = store.restore()?;
    eprintln!(
        "{} datasets, {restored} sessions restored; listening on port {}",
        store.catalog().len(),
        cfg.port
    );
    let app = router(Arc::new(store), cfg.ui_dir);
    let listener = tokio::net::TcpListener::bind(SocketAddr::from(([0, 0, 0, 0], cfg.port))).await?;
    axum::serve(listener, app).await?;
    Ok(())
}
