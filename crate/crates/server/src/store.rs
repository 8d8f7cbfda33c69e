use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use orderlearn::strategies::{Strategy, StrategyKind};
use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::error::ServiceError;
use crate::session::{Session, SessionMeta, Status};

pub type SharedSession = Arc<Mutex<Session>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateSession {
    pub dataset: String,
    pub strategy: String,
    /// Defaults to the pool size.
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default)]
    pub n_seeds: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionSummary {
    pub id: String,
    pub dataset: String,
    pub strategy: StrategyKind,
    pub status: Status,
}

/// Accepts `lc-r+` style names and display names such as `LC-R+`.
pub fn parse_strategy(name: &str) -> Result<StrategyKind, ServiceError> {
    name.parse::<StrategyKind>()
        .ok()
        .or_else(|| Strategy::from_display_name(name).map(|s| s.kind()))
        .ok_or_else(|| ServiceError::UnknownStrategy(name.to_string()))
}

/// All live sessions plus the directory their logs live in.
#[derive(Debug)]
pub struct SessionStore {
    catalog: Catalog,
    logs_dir: PathBuf,
    sessions: Mutex<BTreeMap<String, SharedSession>>,
    counter: AtomicU64,
}

impl SessionStore {
    pub fn new(catalog: Catalog, logs_dir: &Path) -> Result<Self, ServiceError> {
        std::fs::create_dir_all(logs_dir)?;
        Ok(SessionStore {
            catalog,
            logs_dir: logs_dir.to_path_buf(),
            sessions: Mutex::new(BTreeMap::new()),
            counter: AtomicU64::new(0),
        })
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn logs_dir(&self) -> &Path {
        &self.logs_dir
    }

    fn fresh_id(&self) -> String {
        loop {
            let n = self.counter.fetch_add(1, Ordering::Relaxed);
            let id = format!("s{n:04}-{:08x}", rand::random::<u32>());
            if !self.logs_dir.join(format!("{id}.json")).exists() {
                return id;
            }
        }
    }

    pub fn create(&self, req: &CreateSession) -> Result<String, ServiceError> {
        let strategy = parse_strategy(&req.strategy)?;
        let dataset = self.catalog.get(&req.dataset)?;
        let meta = SessionMeta {
            id: self.fresh_id(),
            dataset: dataset.name.clone(),
            strategy,
            budget: req.budget.unwrap_or(dataset.pool.len()),
            n_seeds: req.n_seeds,
            seed: req.seed.unwrap_or_else(rand::random),
        };
        let id = meta.id.clone();
        let session = Session::create(meta, dataset, &self.logs_dir)?;
        self.lock().insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(id)
    }

    pub fn get(&self, id: &str) -> Result<SharedSession, ServiceError> {
        self.lock()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn list(&self) -> Vec<SessionSummary> {
        self.lock()
            .iter()
            .map(|(id, s)| {
                let s = s.lock().expect("session lock poisoned");
                SessionSummary {
                    id: id.clone(),
                    dataset: s.meta().dataset.clone(),
                    strategy: s.meta().strategy,
                    status: s.status(),
                }
            })
            .collect()
    }

    /// Replays every session found in the logs directory. Returns the number
    /// of sessions restored.
    pub fn restore(&self) -> Result<usize, ServiceError> {
        let mut metas = Vec::new();
        for entry in std::fs::read_dir(&self.logs_dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let meta: SessionMeta = serde_json::from_slice(&std::fs::read(&path)?)?;
                metas.push(meta);
            }
        }
        metas.sort_by(|a, b| a.id.cmp(&b.id));
        let n = metas.len();
        for meta in metas {
            let dataset = self.catalog.get(&meta.dataset)?;
            let id = meta.id.clone();
            let session = Session::replay(meta, dataset, &self.logs_dir)?;
            self.lock().insert(id, Arc::new(Mutex::new(session)));
        }
        self.counter.fetch_max(n as u64, Ordering::Relaxed);
        Ok(n)
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, BTreeMap<String, SharedSession>> {
        self.sessions.lock().expect("session table lock poisoned")
    }
}
