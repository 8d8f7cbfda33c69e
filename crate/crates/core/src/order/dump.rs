//! JSON-lines dump of a closure, one labeled pair per line, sorted by pair.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::closure::OrderClosure;
use super::types::{Label, LabelSource, NodeId, Pair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpRecord {
    pub src: NodeId,
    pub dst: NodeId,
    pub label: Label,
    pub source: LabelSource,
}

impl DumpRecord {
    pub fn pair(&self) -> Pair {
        Pair {
            src: self.src,
            dst: self.dst,
        }
    }
}

pub fn dump_records(closure: &OrderClosure) -> Vec<DumpRecord> {
    closure
        .entries()
        .into_iter()
        .map(|(pair, label, source)| DumpRecord {
            src: pair.src,
            dst: pair.dst,
            label,
            source,
        })
        .collect()
}

pub fn write_dump<W: Write>(closure: &OrderClosure, mut out: W) -> io::Result<()> {
    for rec in dump_records(closure) {
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn dump_string(closure: &OrderClosure) -> String {
    let mut buf = Vec::new();
    write_dump(closure, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn read_dump<R: BufRead>(input: R) -> io::Result<Vec<DumpRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}
