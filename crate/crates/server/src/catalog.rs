use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::path::Path;
use std::sync::Arc;

use orderlearn::datasets::io::{read_names, EDGES_FILE, NAMES_FILE, POOL_FILE};
use orderlearn::datasets::{load_dir, Pool};
use orderlearn::order::NodeId;
use serde::Serialize;

use crate::error::ServiceError;

#[derive(Debug)]
pub struct Dataset {
    pub name: String,
    pub pool: Arc<Pool>,
    pub names: HashMap<NodeId, String>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, pool: Pool) -> Self {
        Dataset {
            name: name.into(),
            pool: Arc::new(pool),
            names: HashMap::new(),
        }
    }

    pub fn with_names(mut self, names: HashMap<NodeId, String>) -> Self {
        self.names = names;
        self
    }

    pub fn load(name: &str, dir: &Path) -> Result<Self, ServiceError> {
        let pool = load_dir(dir)?;
        let names_path = dir.join(NAMES_FILE);
        let names = if names_path.exists() {
            read_names(File::open(names_path)?)?
        } else {
            HashMap::new()
        };
        Ok(Dataset::new(name, pool).with_names(names))
    }

    /// Display name of a node, falling back to its id.
    pub fn name_of(&self, node: NodeId) -> String {
        self.names.get(&node).cloned().unwrap_or_else(|| node.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetInfo {
    pub name: String,
    pub n_nodes: usize,
    pub n_pairs: usize,
}

/// Datasets available to sessions, keyed by name.
#[derive(Debug, Default)]
pub struct Catalog {
    datasets: BTreeMap<String, Arc<Dataset>>,
}

fn is_dataset_dir(dir: &Path) -> bool {
    dir.join(EDGES_FILE).exists() || dir.join(POOL_FILE).exists()
}

impl Catalog {
    /// Every subdirectory of `root` holding a pool becomes a dataset named
    /// after the subdirectory; `root` itself counts too when it holds one.
    pub fn load(root: &Path) -> Result<Self, ServiceError> {
        let mut catalog = Catalog::default();
        if is_dataset_dir(root) {
            let name = root
                .file_name()
                .map_or_else(|| "default".to_string(), |n| n.to_string_lossy().into_owned());
            catalog.insert(Dataset::load(&name, root)?);
        }
        let mut entries: Vec<_> = std::fs::read_dir(root)?.collect::<Result<_, _>>()?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let path = entry.path();
            if path.is_dir() && is_dataset_dir(&path) {
                let name = entry.file_name().to_string_lossy().into_owned();
                catalog.insert(Dataset::load(&name, &path)?);
            }
        }
        Ok(catalog)
    }

    pub fn insert(&mut self, dataset: Dataset) {
        self.datasets.insert(dataset.name.clone(), Arc::new(dataset));
    }

    pub fn get(&self, name: &str) -> Result<Arc<Dataset>, ServiceError> {
        self.datasets
            .get(name)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownDataset(name.to_string()))
    }

    pub fn list(&self) -> Vec<DatasetInfo> {
        self.datasets
            .values()
            .map(|d| DatasetInfo {
                name: d.name.clone(),
                n_nodes: d.pool.n_nodes(),
                n_pairs: d.pool.len(),
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.datasets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.datasets.is_empty()
    }
}
