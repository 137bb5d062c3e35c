//! Slicing timestamped edge-event logs into calendar-window snapshots.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Utc};
use serde::{Deserialize, Serialize};

use crate::bins::{DensityBin, SizeBin};
use crate::error::GraphError;
use crate::graph::{largest_component, linear_density, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Daily,
    Weekly,
    Monthly,
    Yearly,
}

impl Window {
    pub const ALL: [Window; 4] = [Window::Daily, Window::Weekly, Window::Monthly, Window::Yearly];

    pub fn as_str(self) -> &'static str {
        match self {
            Window::Daily => "daily",
            Window::Weekly => "weekly",
            Window::Monthly => "monthly",
            Window::Yearly => "yearly",
        }
    }

    /// Calendar bucket label for a UTC timestamp. Weeks follow ISO 8601 (Monday start).
    pub fn bucket(self, ts: i64) -> Option<String> {
        let t: DateTime<Utc> = DateTime::from_timestamp(ts, 0)?;
        Some(match self {
            Window::Daily => t.format("%Y-%m-%d").to_string(),
            Window::Weekly => {
                let w = t.iso_week();
                format!("{:04}-W{:02}", w.year(), w.week())
            }
            Window::Monthly => t.format("%Y-%m").to_string(),
            Window::Yearly => t.format("%Y").to_string(),
        })
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Window::ALL.into_iter().find(|w| w.as_str() == s).ok_or_else(|| format!("unknown window {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeEvent {
    pub a: String,
    pub b: String,
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeEventLog {
    pub events: Vec<EdgeEvent>,
    pub window: Window,
}

impl EdgeEventLog {
    /// Builds a log and sorts events by timestamp (stable, so ties keep file order).
    pub fn new(mut events: Vec<EdgeEvent>, window: Window) -> Self {
        events.sort_by_key(|e| e.timestamp);
        Self { events, window }
    }

    /// Parses `u v unix_timestamp` lines; blank and `#` lines are skipped.
    pub fn parse(text: &str, window: Window) -> Result<Self, GraphError> {
        let mut events = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [a, b, ts] = fields[..] else {
                return Err(GraphError::Parse { line: i + 1, message: format!("expected 3 fields, got {}", fields.len()) });
            };
            let timestamp = ts
                .parse::<f64>()
                .ok()
                .filter(|t| t.is_finite())
                .ok_or_else(|| GraphError::Parse { line: i + 1, message: format!("bad timestamp {ts:?}") })?
                .floor() as i64;
            if DateTime::from_timestamp(timestamp, 0).is_none() {
                return Err(GraphError::Parse { line: i + 1, message: format!("timestamp {ts} out of range") });
            }
            events.push(EdgeEvent { a: a.to_string(), b: b.to_string(), timestamp });
        }
        if events.is_empty() {
            return Err(GraphError::Empty);
        }
        Ok(Self::new(events, window))
    }
}

/// One calendar-window snapshot reduced to its largest connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub window_label: String,
    pub graph: Graph,
    /// External id of each node, indexed by dense node index.
    pub external_ids: Vec<String>,
}

/// Buckets events per calendar window and keeps each bucket's largest component.
/// Duplicate edges and self-loops are dropped; node ids are remapped densely in
/// order of first appearance. Buckets with no edge are skipped.
pub fn slice_windows(log: &EdgeEventLog) -> Result<Vec<Snapshot>, GraphError> {
    if log.events.is_empty() {
        return Err(GraphError::Empty);
    }
    let mut buckets: BTreeMap<i64, (String, Vec<&EdgeEvent>)> = BTreeMap::new();
    let mut label_start: HashMap<String, i64> = HashMap::new();
    for e in &log.events {
        let label = log
            .window
            .bucket(e.timestamp)
            .ok_or_else(|| GraphError::Parse { line: 0, message: format!("timestamp {} out of range", e.timestamp) })?;
        let start = *label_start.entry(label.clone()).or_insert(e.timestamp);
        buckets.entry(start).or_insert_with(|| (label, Vec::new())).1.push(e);
    }
    let mut out = Vec::new();
    for (_, (label, events)) in buckets {
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut names: Vec<String> = Vec::new();
        let mut edges = Vec::new();
        for e in events {
            if e.a == e.b {
                continue;
            }
            let mut ends = [0usize; 2];
            for (slot, id) in ends.iter_mut().zip([e.a.as_str(), e.b.as_str()]) {
                *slot = *ids.entry(id).or_insert_with(|| {
                    names.push(id.to_string());
                    names.len() - 1
                });
            }
            let [u, v] = ends;
            edges.push((u.min(v), u.max(v)));
        }
        if edges.is_empty() {
            continue;
        }
        edges.sort_unstable();
        edges.dedup();
        let (graph, members) = largest_component(names.len(), &edges)?;
        let external_ids = members.iter().map(|&i| names[i].clone()).collect();
        out.push(Snapshot { window_label: label, graph, external_ids });
    }
    Ok(out)
}

/// [`slice_windows`] followed by the stimulus bin filter: snapshots whose node count or
/// linear density fall outside every size and density bin are discarded.
pub fn slice_dynamic(log: &EdgeEventLog) -> Result<Vec<Snapshot>, GraphError> {
    Ok(slice_windows(log)?
        .into_iter()
        .filter(|s| SizeBin::classify(s.graph.node_count()).is_some() && DensityBin::classify(linear_density(&s.graph)).is_some())
        .collect())
}
