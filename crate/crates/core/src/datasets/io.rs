//! File formats for pools.
//!
//! * `edges.csv`: `src,dst` per positive edge, header optional. The order is
//!   transitively closed on load.
//! * `features.csv`: `src,dst,f1,...,fd`; one row per pool pair.
//! * `pool.json`: the whole pool in one document.
//! * `names.csv` (optional): `id,name` display names.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::order::{GroundTruth, NodeId, Pair};

use super::{DatasetError, Pool};

pub const EDGES_FILE: &str = "edges.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const POOL_FILE: &str = "pool.json";
pub const NAMES_FILE: &str = "names.csv";

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
}

fn parse_node(field: &str, line: u64) -> Result<NodeId, DatasetError> {
    field
        .parse::<u32>()
        .map(NodeId)
        .map_err(|_| DatasetError::Parse {
            line,
            msg: format!("expected a node id, got {field:?}"),
        })
}

fn is_header(rec: &csv::StringRecord) -> bool {
    rec.get(0).is_some_and(|f| f.parse::<u32>().is_err())
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

pub fn read_edges<R: Read>(input: R) -> Result<Vec<Pair>, DatasetError> {
    let mut out = Vec::new();
    for (i, rec) in csv_reader(input).records().enumerate() {
        let rec = rec?;
        if i == 0 && is_header(&rec) {
            continue;
        }
        let line = record_line(&rec);
        if rec.len() != 2 {
            return Err(DatasetError::Parse {
                line,
                msg: format!("expected 2 fields, got {}", rec.len()),
            });
        }
        out.push(Pair {
            src: parse_node(&rec[0], line)?,
            dst: parse_node(&rec[1], line)?,
        });
    }
    Ok(out)
}

pub fn read_features<R: Read>(input: R) -> Result<Vec<(Pair, Vec<f64>)>, DatasetError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut dim = None;
    for (i, rec) in csv_reader(input).records().enumerate() {
        let rec = rec?;
        if i == 0 && is_header(&rec) {
            continue;
        }
        let line = record_line(&rec);
        if rec.len() < 3 {
            return Err(DatasetError::Parse {
                line,
                msg: "expected src,dst and at least one feature".into(),
            });
        }
        let d = rec.len() - 2;
        match dim {
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(DatasetError::Ragged { line, expected, got: d });
            }
            _ => {}
        }
        let pair = Pair {
            src: parse_node(&rec[0], line)?,
            dst: parse_node(&rec[1], line)?,
        };
        if pair.is_reflexive() {
            return Err(DatasetError::Parse {
                line,
                msg: format!("reflexive pair {pair}"),
            });
        }
        if !seen.insert(pair) {
            return Err(DatasetError::Parse {
                line,
                msg: format!("pair {pair} listed twice"),
            });
        }
        let mut values = Vec::with_capacity(d);
        for field in rec.iter().skip(2) {
            let v: f64 = field.parse().map_err(|_| DatasetError::Parse {
                line,
                msg: format!("bad feature value {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(DatasetError::NonFinite { line });
            }
            values.push(v);
        }
        out.push((pair, values));
    }
    Ok(out)
}

/// Pool from an edges file and a features file. The node count is one past
/// the largest id mentioned in either file.
pub fn load_pool(edges_path: &Path, features_path: &Path) -> Result<Pool, DatasetError> {
    let edges = read_edges(File::open(edges_path)?)?;
    let rows = read_features(File::open(features_path)?)?;
    let n = edges
        .iter()
        .chain(rows.iter().map(|(p, _)| p))
        .map(|p| p.src.index().max(p.dst.index()) + 1)
        .max()
        .unwrap_or(0);
    let truth = GroundTruth::from_edges(n, edges)?;
    let (pairs, features) = rows.into_iter().unzip();
    Pool::new(truth, pairs, features)
}

/// Loads `DIR/edges.csv` + `DIR/features.csv`, or `DIR/pool.json` when the
/// CSV pair is absent.
pub fn load_dir(dir: &Path) -> Result<Pool, DatasetError> {
    let edges = dir.join(EDGES_FILE);
    let features = dir.join(FEATURES_FILE);
    if edges.exists() && features.exists() {
        load_pool(&edges, &features)
    } else {
        read_pool_json(&dir.join(POOL_FILE))
    }
}

pub fn write_edges<W: Write>(pool: &Pool, out: W) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["src", "dst"])?;
    for p in pool.truth().transitive_reduction() {
        w.write_record([p.src.to_string(), p.dst.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_features<W: Write>(pool: &Pool, out: W) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["src".to_string(), "dst".to_string()];
    header.extend((1..=pool.dim()).map(|k| format!("f{k}")));
    w.write_record(&header)?;
    for (i, p) in pool.pairs().iter().enumerate() {
        let mut row = vec![p.src.to_string(), p.dst.to_string()];
        // `{:?}` prints the shortest representation that round-trips.
        row.extend(pool.features(i).iter().map(|v| format!("{v:?}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct PoolDoc {
    n_nodes: usize,
    edges: Vec<Pair>,
    pairs: Vec<PoolRow>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PoolRow {
    src: NodeId,
    dst: NodeId,
    features: Vec<f64>,
}

pub fn write_pool_json(pool: &Pool, path: &Path) -> Result<(), DatasetError> {
    let doc = PoolDoc {
        n_nodes: pool.n_nodes(),
        edges: pool.truth().transitive_reduction().into_iter().collect(),
        pairs: pool
            .pairs()
            .iter()
            .enumerate()
            .map(|(i, p)| PoolRow {
                src: p.src,
                dst: p.dst,
                features: pool.features(i).to_vec(),
            })
            .collect(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &doc)?;
    w.flush()?;
    Ok(())
}

pub fn read_pool_json(path: &Path) -> Result<Pool, DatasetError> {
    let doc: PoolDoc = serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?;
    let truth = GroundTruth::from_edges(doc.n_nodes, doc.edges)?;
    let (pairs, features) = doc
        .pairs
        .into_iter()
        .map(|r| (Pair { src: r.src, dst: r.dst }, r.features))
        .unzip();
    Pool::new(truth, pairs, features)
}

/// Writes `edges.csv`, `features.csv` and `pool.json` into `dir`.
pub fn write_dir(pool: &Pool, dir: &Path) -> Result<(), DatasetError> {
    std::fs::create_dir_all(dir)?;
    write_edges(pool, BufWriter::new(File::create(dir.join(EDGES_FILE))?))?;
    write_features(pool, BufWriter::new(File::create(dir.join(FEATURES_FILE))?))?;
    write_pool_json(pool, &dir.join(POOL_FILE))
}

pub fn read_names<R: Read>(input: R) -> Result<HashMap<NodeId, String>, DatasetError> {
    let mut out = HashMap::new();
    for (i, rec) in csv_reader(input).records().enumerate() {
        let rec = rec?;
        if i == 0 && is_header(&rec) {
            continue;
        }
        let line = record_line(&rec);
        if rec.len() < 2 {
            return Err(DatasetError::Parse {
                line,
                msg: "expected id,name".into(),
            });
        }
        out.insert(parse_node(&rec[0], line)?, rec[1].to_string());
    }
    Ok(out)
}
