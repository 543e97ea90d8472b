//! Traversal traces and the code snapshot store.
//!
//! Every gate decision is recorded, and every intermediate code version
//! is kept, so a finished run can be audited node by node: what was
//! scored, what was applied, and what the code looked like afterwards.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::NodeId;

/// Index into the snapshot store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SnapshotId(pub u32);

impl fmt::Display for SnapshotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Every code version a traversal produced, in order: the seed, one entry
/// per applied practice, and the revised final code.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshots {
    versions: Vec<String>,
}

impl Snapshots {
    pub fn push(&mut self, code: impl Into<String>) -> SnapshotId {
        self.versions.push(code.into());
        SnapshotId((self.versions.len() - 1) as u32)
    }

    pub fn get(&self, id: SnapshotId) -> Option<&str> {
        self.versions.get(id.0 as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.versions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.versions.is_empty()
    }

    pub fn last(&self) -> Option<&str> {
        self.versions.last().map(String::as_str)
    }
}

/// How a node was handled at its gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    /// Root, or at least one parent relevant: the node was scored.
    Evaluated,
    /// Every parent was visited but none relevant: marked visited
    /// without a model call.
    SkippedNoRelevantParent,
}

/// One per-node record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub node_id: NodeId,
    pub gate: Gate,
    /// Present iff the gate was `Evaluated` and a score step ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<u8>,
    /// The practice was applied (score met the threshold, or the
    /// traversal ran with the gate forced open).
    pub applied: bool,
    /// The apply call returned no code block; previous code was kept.
    #[serde(default)]
    pub apply_noop: bool,
    /// Code version in effect after this node.
    pub code_ref: SnapshotId,
}

/// The full record of one traversal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraversalTrace {
    pub entries: Vec<TraceEntry>,
    pub relevant: BTreeSet<NodeId>,
    pub visited: BTreeSet<NodeId>,
    /// Seed + one per evaluated (or force-applied) node + revise.
    pub iteration_count: u32,
}

impl TraversalTrace {
    pub fn new() -> Self {
        TraversalTrace {
            entries: Vec::new(),
            relevant: BTreeSet::new(),
            visited: BTreeSet::new(),
            iteration_count: 0,
        }
    }

    pub fn entry(&self, node: NodeId) -> Option<&TraceEntry> {
        self.entries.iter().find(|e| e.node_id == node)
    }

    /// Nodes that were actually scored.
    pub fn evaluated(&self) -> impl Iterator<Item = &TraceEntry> {
        self.entries.iter().filter(|e| e.gate == Gate::Evaluated)
    }

    /// Nodes with the applied flag set.
    pub fn applied(&self) -> impl Iterator<Item = &TraceEntry> {
        self.entries.iter().filter(|e| e.applied)
    }
}

impl Default for TraversalTrace {
    fn default() -> Self {
        Self::new()
    }
}
