//! The SCP graph: an immutable DAG of secure coding practices.
//!
//! Nodes carry one practice each, expressed as a natural-language sentence.
//! Edges are directed parent → child and come in two kinds: *specificity*
//! (the child is a concrete realization of a general parent) and
//! *sequential* (the child is only meaningful after the parent has been
//! applied). The traversal engine treats both kinds identically; kinds are
//! preserved for documentation and review rendering.
//!
//! Construction enforces the structural invariants (unique ids, existing
//! endpoints, no self-loops, no duplicate edges, non-empty text). The
//! deeper shape invariants — acyclicity, a single parentless root, full
//! reachability — are checked by [`validate`](ScpGraph::validate), which
//! reports violations as data so that a malformed document can be
//! diagnosed rather than rejected wholesale.

mod algo;
mod document;
mod validate;

pub use algo::Reduction;
pub use document::{
    apply_overlay, parse_graph, parse_overlay, to_document_json, DocumentError, EdgeKindOverride,
    ParsedGraph,
};
pub use validate::{ValidationReport, Violation};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of one practice node. Ids are non-negative and unique
/// within a graph; ascending id is the deterministic tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Relationship kind carried by an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    /// Parent is a general principle; child is a concrete realization.
    Specificity,
    /// Child only applies once the parent practice is in place.
    Sequential,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeKind::Specificity => write!(f, "specificity"),
            EdgeKind::Sequential => write!(f, "sequential"),
        }
    }
}

/// One secure coding practice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScpNode {
    pub id: NodeId,
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
}

impl ScpNode {
    pub fn new(id: u32, text: impl Into<String>) -> Self {
        ScpNode { id: NodeId(id), text: text.into(), tags: Vec::new() }
    }
}

/// A directed parent → child edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ScpEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub kind: EdgeKind,
}

impl ScpEdge {
    pub fn new(from: u32, to: u32, kind: EdgeKind) -> Self {
        ScpEdge { from: NodeId(from), to: NodeId(to), kind }
    }
}

/// Structural errors raised while building a graph.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("duplicate node id {0}")]
    DuplicateId(NodeId),
    #[error("node {0} has empty practice text")]
    EmptyText(NodeId),
    #[error("edge {from} -> {to} references unknown node {missing}")]
    DanglingEdge { from: NodeId, to: NodeId, missing: NodeId },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: NodeId, to: NodeId },
    #[error("root id {0} is not a node in the graph")]
    UnknownRoot(NodeId),
    #[error("graph contains a cycle: {}", format_cycle(.0))]
    Cyclic(Vec<NodeId>),
}

fn format_cycle(cycle: &[NodeId]) -> String {
    cycle.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" -> ")
}

/// The practice DAG. Immutable after construction; adjacency queries are
/// pure and return children/parents in ascending-id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScpGraph {
    nodes: BTreeMap<NodeId, ScpNode>,
    root: NodeId,
    children: BTreeMap<NodeId, Vec<NodeId>>,
    parents: BTreeMap<NodeId, Vec<NodeId>>,
    kinds: BTreeMap<(NodeId, NodeId), EdgeKind>,
}

impl ScpGraph {
    /// Assemble a graph from parts, checking the structural invariants.
    /// Shape invariants (acyclicity, single root, reachability) are the
    /// domain of [`validate`](Self::validate).
    pub fn new(nodes: Vec<ScpNode>, edges: Vec<ScpEdge>, root: NodeId) -> Result<Self, GraphError> {
        let mut node_map = BTreeMap::new();
        for node in nodes {
            if node.text.trim().is_empty() {
                return Err(GraphError::EmptyText(node.id));
            }
            if node_map.insert(node.id, node.clone()).is_some() {
                return Err(GraphError::DuplicateId(node.id));
            }
        }
        if !node_map.contains_key(&root) {
            return Err(GraphError::UnknownRoot(root));
        }

        let mut children: BTreeMap<NodeId, Vec<NodeId>> =
            node_map.keys().map(|&id| (id, Vec::new())).collect();
        let mut parents: BTreeMap<NodeId, Vec<NodeId>> =
            node_map.keys().map(|&id| (id, Vec::new())).collect();
        let mut kinds = BTreeMap::new();

        for edge in &edges {
            if edge.from == edge.to {
                return Err(GraphError::SelfLoop(edge.from));
            }
            for endpoint in [edge.from, edge.to] {
                if !node_map.contains_key(&endpoint) {
                    return Err(GraphError::DanglingEdge {
                        from: edge.from,
                        to: edge.to,
                        missing: endpoint,
                    });
                }
            }
            if kinds.insert((edge.from, edge.to), edge.kind).is_some() {
                return Err(GraphError::DuplicateEdge { from: edge.from, to: edge.to });
            }
            children.get_mut(&edge.from).expect("endpoint checked").push(edge.to);
            parents.get_mut(&edge.to).expect("endpoint checked").push(edge.from);
        }
        for list in children.values_mut().chain(parents.values_mut()) {
            list.sort_unstable();
        }

        Ok(ScpGraph { nodes: node_map, root, children, parents, kinds })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&ScpNode> {
        self.nodes.get(&id)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    /// Node ids in ascending order.
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    /// Nodes in ascending-id order.
    pub fn nodes(&self) -> impl Iterator<Item = &ScpNode> {
        self.nodes.values()
    }

    /// Children of `id` in ascending-id order; empty for unknown ids.
    pub fn children(&self, id: NodeId) -> &[NodeId] {
        self.children.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Parents of `id` in ascending-id order; empty for unknown ids.
    pub fn parents(&self, id: NodeId) -> &[NodeId] {
        self.parents.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn edge_kind(&self, from: NodeId, to: NodeId) -> Option<EdgeKind> {
        self.kinds.get(&(from, to)).copied()
    }

    /// All edges in ascending (from, to) order.
    pub fn edges(&self) -> impl Iterator<Item = ScpEdge> + '_ {
        self.kinds.iter().map(|(&(from, to), &kind)| ScpEdge { from, to, kind })
    }

    /// Ids reachable from the root, including the root itself.
    pub fn reachable_from_root(&self) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if seen.insert(id) {
                stack.extend(self.children(id).iter().copied());
            }
        }
        seen
    }

    /// Shape validation: every violation is reported, none is fatal here.
    pub fn validate(&self) -> ValidationReport {
        validate::validate(self)
    }

    /// Parents-before-children order with ascending-id tie-break.
    /// Deterministic across runs and platforms. Errors on cyclic input.
    pub fn topological_order(&self) -> Result<Vec<NodeId>, GraphError> {
        algo::topological_order(self)
    }

    /// Remove every edge implied by a longer path, preserving the
    /// transitive closure and each surviving edge's kind. Errors on
    /// cyclic input.
    pub fn transitive_reduce(&self) -> Result<Reduction, GraphError> {
        algo::transitive_reduce(self)
    }

    /// Reachability closure as (ancestor, descendant) pairs, computed by
    /// plain DFS from every node.
    pub fn closure(&self) -> BTreeSet<(NodeId, NodeId)> {
        algo::closure(self)
    }

    /// Plain-text adjacency dump, one `parent -> child (kind)` line per
    /// edge.
    pub fn adjacency_dump(&self) -> String {
        let mut out = String::new();
        for edge in self.edges() {
            out.push_str(&format!("{} -> {} ({})\n", edge.from, edge.to, edge.kind));
        }
        out
    }
}
