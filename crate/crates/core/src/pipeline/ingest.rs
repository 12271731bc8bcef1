//! JSONL event logs.
//!
//! One event per line:
//!
//! ```text
//! {"proc": "apr", "ts": 9, "kind": "send", "msg": "m1", "props": ["a"], "vars": {"x": 3}}
//! ```
//!
//! Process names are sorted and numbered from 1. `vars` are absolute values; a
//! variable keeps its last value on its process until the next event that mentions it,
//! and every variable seen anywhere starts at 0 on every process.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::computation::{Event, EventKind, ProcessId};
use crate::mtl::State;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{source_name}:{line}: {message}")]
    Malformed { source_name: String, line: usize, message: String },
    #[error("{source_name}:{line}: timestamp {ts} of process {proc} does not increase")]
    NonMonotone { source_name: String, line: usize, proc: String, ts: i64 },
    #[error("message {0:?} has no matching send or receive")]
    DanglingMessage(String),
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Local,
    Send,
    Recv,
}

/// One line of a log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub proc: String,
    pub ts: i64,
    pub kind: Kind,
    #[serde(default)]
    pub msg: Option<String>,
    #[serde(default)]
    pub props: Vec<String>,
    #[serde(default)]
    pub vars: BTreeMap<String, i64>,
}

pub fn ingest(path: impl AsRef<Path>) -> Result<Vec<Event>, IngestError> {
    ingest_many([path])
}

/// Reads several logs as one computation, e.g. one file per process.
pub fn ingest_many<P: AsRef<Path>>(paths: impl IntoIterator<Item = P>) -> Result<Vec<Event>, IngestError> {
    let mut records = Vec::new();
    for p in paths {
        let p = p.as_ref();
        let text = std::fs::read_to_string(p)
            .map_err(|e| IngestError::Io { path: p.to_path_buf(), message: e.to_string() })?;
        records.extend(parse_records(&p.display().to_string(), &text)?);
    }
    build(records)
}

pub fn ingest_str(text: &str) -> Result<Vec<Event>, IngestError> {
    build(parse_records("<input>", text)?)
}

struct Located {
    source_name: String,
    line: usize,
    record: Record,
}

fn parse_records(source_name: &str, text: &str) -> Result<Vec<Located>, IngestError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| IngestError::Malformed { source_name: source_name.into(), line, message };
        let record: Record = serde_json::from_str(raw).map_err(|e| malformed(e.to_string()))?;
        if record.ts < 0 {
            return Err(malformed(format!("negative timestamp {}", record.ts)));
        }
        if record.kind != Kind::Local && record.msg.is_none() {
            return Err(malformed("send and recv need a msg".into()));
        }
        out.push(Located { source_name: source_name.into(), line, record });
    }
    Ok(out)
}

fn build(records: Vec<Located>) -> Result<Vec<Event>, IngestError> {
    let names: BTreeSet<&str> = records.iter().map(|r| r.record.proc.as_str()).collect();
    let ids: HashMap<&str, ProcessId> = names.iter().enumerate().map(|(i, n)| (*n, i + 1)).collect();
    let all_vars: BTreeSet<&str> =
        records.iter().flat_map(|r| r.record.vars.keys().map(String::as_str)).collect();

    let mut last_ts: HashMap<&str, i64> = HashMap::new();
    let mut current: HashMap<&str, BTreeMap<String, i64>> = HashMap::new();
    let mut sends: HashMap<&str, usize> = HashMap::new();
    let mut recvs: HashMap<&str, usize> = HashMap::new();
    let mut events = Vec::with_capacity(records.len());
    for r in &records {
        let rec = &r.record;
        let proc = rec.proc.as_str();
        if let Some(&prev) = last_ts.get(proc) {
            if rec.ts <= prev {
                return Err(IngestError::NonMonotone {
                    source_name: r.source_name.clone(),
                    line: r.line,
                    proc: proc.into(),
                    ts: rec.ts,
                });
            }
        }
        last_ts.insert(proc, rec.ts);
        let vars = current
            .entry(proc)
            .or_insert_with(|| all_vars.iter().map(|v| (v.to_string(), 0)).collect());
        vars.extend(rec.vars.iter().map(|(k, v)| (k.clone(), *v)));
        let payload = State { propositions: rec.props.iter().cloned().collect(), variables: vars.clone() };
        let kind = match (&rec.kind, &rec.msg) {
            (Kind::Send, Some(m)) => {
                *sends.entry(m).or_default() += 1;
                EventKind::Send(m.clone())
            }
            (Kind::Recv, Some(m)) => {
                *recvs.entry(m).or_default() += 1;
                EventKind::Recv(m.clone())
            }
            _ => EventKind::Local,
        };
        events.push(Event { process: ids[proc], local_time: rec.ts as u64, kind, payload, index: 0 });
    }
    for (m, n) in &sends {
        if *n != 1 || recvs.get(m) != Some(&1) {
            return Err(IngestError::DanglingMessage(m.to_string()));
        }
    }
    if let Some(m) = recvs.keys().find(|m| !sends.contains_key(*m)) {
        return Err(IngestError::DanglingMessage(m.to_string()));
    }
    Ok(events)
}

/// Log lines for `events`; process `p` is written as `names[p - 1]`.
pub fn to_records(events: &[Event], names: &[&str]) -> Vec<Record> {
    events
        .iter()
        .map(|e| {
            let (kind, msg) = match &e.kind {
                EventKind::Local => (Kind::Local, None),
                EventKind::Send(m) => (Kind::Send, Some(m.clone())),
                EventKind::Recv(m) => (Kind::Recv, Some(m.clone())),
            };
            Record {
                proc: names.get(e.process.wrapping_sub(1)).map_or_else(|| format!("p{}", e.process), |n| n.to_string()),
                ts: e.local_time as i64,
                kind,
                msg,
                props: e.payload.propositions.iter().cloned().collect(),
                vars: e.payload.variables.clone(),
            }
        })
        .collect()
}

pub fn to_jsonl(records: &[Record]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("records serialize"));
        s.push('\n');
    }
    s
}
