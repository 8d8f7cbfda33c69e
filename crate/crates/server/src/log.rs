//! Append-only JSON-lines label log, one [`LabelEvent`] per line.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use orderlearn::order::{Deduction, Label, NodeId, Pair, Rule};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventSource {
    Seed,
    Human,
    Deduced,
    /// A human answer that contradicted the closure and halted the session.
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelEvent {
    pub src: NodeId,
    pub dst: NodeId,
    pub label: Label,
    pub source: EventSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<Rule>,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    pub query_index: usize,
}

impl LabelEvent {
    pub fn new(pair: Pair, label: Label, source: EventSource, query_index: usize) -> Self {
        LabelEvent {
            src: pair.src,
            dst: pair.dst,
            label,
            source,
            rule: None,
            timestamp: now_ms(),
            query_index,
        }
    }

    pub fn deduced(d: &Deduction, query_index: usize) -> Self {
        LabelEvent {
            rule: Some(d.rule),
            ..LabelEvent::new(d.pair, d.label, EventSource::Deduced, query_index)
        }
    }

    pub fn pair(&self) -> Pair {
        Pair {
            src: self.src,
            dst: self.dst,
        }
    }

    /// Events that change the closure directly, as opposed to records of
    /// what the service deduced or refused.
    pub fn is_answer(&self) -> bool {
        matches!(self.source, EventSource::Seed | EventSource::Human)
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// Durable writer: every [`append`](LabelLog::append) is flushed and synced
/// before it returns.
#[derive(Debug)]
pub struct LabelLog {
    path: PathBuf,
    file: File,
}

impl LabelLog {
    pub fn open(path: &Path) -> Result<Self, ServiceError> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(LabelLog {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, events: &[LabelEvent]) -> Result<(), ServiceError> {
        let mut buf = Vec::new();
        for e in events {
            serde_json::to_writer(&mut buf, e)?;
            buf.push(b'\n');
        }
        self.file.write_all(&buf)?;
        self.file.sync_data()?;
        Ok(())
    }
}

pub fn read_log(path: &Path) -> Result<Vec<LabelEvent>, ServiceError> {
    let reader = BufReader::new(File::open(path)?);
    let mut events = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line)
            .map_err(|e| ServiceError::LogMismatch(format!("line {}: {e}", i + 1)))?;
        events.push(event);
    }
    Ok(events)
}
