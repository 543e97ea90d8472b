//! Edge assembly and graph repair.
//!
//! Non-`None` classifications become directed edges. Repair then runs in
//! a fixed order: edges into the designated root are dropped (the root
//! must stay parentless), cycles are broken by removing the
//! lowest-confidence edge in a reported cycle (ties: smallest (from, to)
//! pair), the result is transitively reduced, and finally every
//! parentless node except the root is attached under the root. Every
//! removal and attachment lands in the repair log, and the finished
//! graph always passes validation with an empty report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BuilderError, PairClassification, PairRelation, PracticeRecord};
use crate::graph::{EdgeKind, NodeId, ScpEdge, ScpGraph, ScpNode};

/// Why an edge was removed or added during repair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairAction {
    /// Removed: it pointed at the designated root.
    RootIncomingRemoval,
    /// Removed: lowest-confidence edge in a cycle.
    CycleRemoval,
    /// Removed: implied by a longer path.
    RedundantRemoval,
    /// Added: node had no parents, attached under the root.
    RootAttachment,
}

/// One repair log entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairEvent {
    pub action: RepairAction,
    pub from: NodeId,
    pub to: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

/// Everything repair did, in order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RepairLog {
    pub events: Vec<RepairEvent>,
}

impl RepairLog {
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn removals(&self) -> impl Iterator<Item = &RepairEvent> {
        self.events.iter().filter(|e| e.action != RepairAction::RootAttachment)
    }
}

/// Where a surviving edge came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EdgeProvenance {
    /// Pairwise classification with the model's confidence.
    Classified { confidence: f64 },
    /// Added by repair to keep the graph single-rooted.
    Attached,
    /// No recorded origin (hand-curated data).
    Curated,
}

/// The assembled graph with its repair log and per-edge provenance.
#[derive(Debug, Clone)]
pub struct AssembledGraph {
    pub graph: ScpGraph,
    pub log: RepairLog,
    pub provenance: BTreeMap<(NodeId, NodeId), EdgeProvenance>,
}

type EdgeMap = BTreeMap<(NodeId, NodeId), (EdgeKind, f64)>;

fn build_graph(nodes: &[ScpNode], edges: &EdgeMap, root: NodeId) -> ScpGraph {
    let edge_list: Vec<ScpEdge> =
        edges.iter().map(|(&(from, to), &(kind, _))| ScpEdge { from, to, kind }).collect();
    ScpGraph::new(nodes.to_vec(), edge_list, root).expect("assembly edges are structurally sound")
}

/// Turn classifications into a validated graph.
///
/// `root_source_id` designates which included practice anchors the graph;
/// it becomes node 0 and the remaining included practices get ids in
/// lexicographic source-id order. Each node's source id is kept as a
/// `src:` tag.
pub fn assemble_and_repair(
    classifications: &[PairClassification],
    records: &[PracticeRecord],
    root_source_id: &str,
) -> Result<AssembledGraph, BuilderError> {
    let mut included: Vec<&PracticeRecord> = records.iter().filter(|r| r.included).collect();
    included.sort_by(|x, y| x.source_id.cmp(&y.source_id));
    if !included.iter().any(|r| r.source_id == root_source_id) {
        return Err(BuilderError::MissingRoot(root_source_id.to_string()));
    }

    // Root first, then the rest in source-id order.
    let mut id_of: BTreeMap<&str, NodeId> = BTreeMap::new();
    let mut nodes = Vec::with_capacity(included.len());
    let root = NodeId(0);
    let mut next = 1u32;
    for record in &included {
        let id = if record.source_id == root_source_id {
            root
        } else {
            let id = NodeId(next);
            next += 1;
            id
        };
        id_of.insert(record.source_id.as_str(), id);
        nodes.push(ScpNode {
            id,
            text: record.normalized_text.clone(),
            tags: vec![format!("src:{}", record.source_id)],
        });
    }
    nodes.sort_by_key(|n| n.id);

    let mut log = RepairLog::default();
    let mut edges: EdgeMap = BTreeMap::new();
    for c in classifications {
        let (Some(&a), Some(&b)) = (id_of.get(c.a.as_str()), id_of.get(c.b.as_str())) else {
            continue; // pair involves an excluded practice
        };
        if a == b {
            continue;
        }
        let (from, to, kind) = match c.relation {
            PairRelation::None => continue,
            PairRelation::SequentialAb => (a, b, EdgeKind::Sequential),
            PairRelation::SequentialBa => (b, a, EdgeKind::Sequential),
            PairRelation::SpecificityAb => (a, b, EdgeKind::Specificity),
            PairRelation::SpecificityBa => (b, a, EdgeKind::Specificity),
        };
        // Duplicate direction from merged classification sets: keep the
        // more confident verdict.
        match edges.get(&(from, to)) {
            Some(&(_, existing)) if existing >= c.confidence => {}
            _ => {
                edges.insert((from, to), (kind, c.confidence));
            }
        }
    }

    // The root must stay parentless.
    let incoming_root: Vec<(NodeId, NodeId)> =
        edges.keys().copied().filter(|&(_, to)| to == root).collect();
    for key in incoming_root {
        let (_, confidence) = edges.remove(&key).expect("key from map");
        log.events.push(RepairEvent {
            action: RepairAction::RootIncomingRemoval,
            from: key.0,
            to: key.1,
            confidence: Some(confidence),
        });
    }

    // Break cycles one edge at a time: lowest confidence within the
    // first reported cycle, smallest (from, to) on ties.
    loop {
        let graph = build_graph(&nodes, &edges, root);
        let report = graph.validate();
        let Some(crate::graph::Violation::Cycle { nodes: cycle }) =
            report.violations.iter().find(|v| matches!(v, crate::graph::Violation::Cycle { .. }))
        else {
            break;
        };
        let mut cycle_edges: Vec<(NodeId, NodeId)> = Vec::new();
        for i in 0..cycle.len() {
            let from = cycle[i];
            let to = cycle[(i + 1) % cycle.len()];
            if edges.contains_key(&(from, to)) {
                cycle_edges.push((from, to));
            }
        }
        let victim = cycle_edges
            .into_iter()
            .min_by(|&x, &y| {
                let cx = edges[&x].1;
                let cy = edges[&y].1;
                cx.partial_cmp(&cy).unwrap_or(std::cmp::Ordering::Equal).then(x.cmp(&y))
            })
            .expect("a reported cycle has edges");
        let (_, confidence) = edges.remove(&victim).expect("victim from map");
        log.events.push(RepairEvent {
            action: RepairAction::CycleRemoval,
            from: victim.0,
            to: victim.1,
            confidence: Some(confidence),
        });
    }

    // Drop edges implied by longer paths.
    let reduction =
        build_graph(&nodes, &edges, root).transitive_reduce().expect("cycles were just removed");
    for removed in &reduction.removed {
        let (_, confidence) = edges.remove(&(removed.from, removed.to)).expect("edge from map");
        log.events.push(RepairEvent {
            action: RepairAction::RedundantRemoval,
            from: removed.from,
            to: removed.to,
            confidence: Some(confidence),
        });
    }

    // Single-root repair: attach parentless nodes under the root.
    let graph = build_graph(&nodes, &edges, root);
    let orphans: Vec<NodeId> =
        graph.node_ids().filter(|&id| id != root && graph.parents(id).is_empty()).collect();
    let mut provenance: BTreeMap<(NodeId, NodeId), EdgeProvenance> = edges
        .iter()
        .map(|(&key, &(_, confidence))| (key, EdgeProvenance::Classified { confidence }))
        .collect();
    for orphan in orphans {
        edges.insert((root, orphan), (EdgeKind::Specificity, 1.0));
        provenance.insert((root, orphan), EdgeProvenance::Attached);
        log.events.push(RepairEvent {
            action: RepairAction::RootAttachment,
            from: root,
            to: orphan,
            confidence: None,
        });
    }

    let graph = build_graph(&nodes, &edges, root);
    debug_assert!(graph.validate().is_valid());
    Ok(AssembledGraph { graph, log, provenance })
}
