//! Topological ordering and transitive reduction.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::{GraphError, NodeId, ScpEdge, ScpGraph};

/// Kahn's algorithm with a min-heap so equal-depth nodes come out in
/// ascending id order. Cyclic input is detected by a short output.
pub(super) fn topological_order(graph: &ScpGraph) -> Result<Vec<NodeId>, GraphError> {
    let mut indegree: BTreeMap<NodeId, usize> =
        graph.node_ids().map(|id| (id, graph.parents(id).len())).collect();
    let mut ready: BinaryHeap<Reverse<NodeId>> =
        indegree.iter().filter(|(_, &d)| d == 0).map(|(&id, _)| Reverse(id)).collect();

    let mut order = Vec::with_capacity(graph.node_count());
    while let Some(Reverse(id)) = ready.pop() {
        order.push(id);
        for &child in graph.children(id) {
            let d = indegree.get_mut(&child).expect("child is a node");
            *d -= 1;
            if *d == 0 {
                ready.push(Reverse(child));
            }
        }
    }

    if order.len() != graph.node_count() {
        let cycle = super::validate::find_cycles(graph).into_iter().next().unwrap_or_default();
        return Err(GraphError::Cyclic(cycle));
    }
    Ok(order)
}

/// Result of a transitive reduction: the reduced graph plus the changelog
/// of removed edges.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub graph: ScpGraph,
    pub removed: Vec<ScpEdge>,
}

/// For a DAG the minimal edge set with the same closure is unique: an
/// edge u → v survives iff v is not reachable through any other child of
/// u. Edge kinds ride along on surviving edges.
pub(super) fn transitive_reduce(graph: &ScpGraph) -> Result<Reduction, GraphError> {
    let order = topological_order(graph)?;

    // reach[u] = every node reachable from u (including u), built bottom-up.
    let mut reach: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for &id in order.iter().rev() {
        let mut set = BTreeSet::new();
        set.insert(id);
        for &child in graph.children(id) {
            set.extend(reach[&child].iter().copied());
        }
        reach.insert(id, set);
    }

    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for edge in graph.edges() {
        let redundant = graph
            .children(edge.from)
            .iter()
            .any(|&sibling| sibling != edge.to && reach[&sibling].contains(&edge.to));
        if redundant {
            removed.push(edge);
        } else {
            kept.push(edge);
        }
    }

    let nodes = graph.nodes().cloned().collect();
    let reduced = ScpGraph::new(nodes, kept, graph.root())
        .expect("reduction preserves structural invariants");
    Ok(Reduction { graph: reduced, removed })
}

/// All (ancestor, descendant) pairs with ancestor ≠ descendant.
pub(super) fn closure(graph: &ScpGraph) -> BTreeSet<(NodeId, NodeId)> {
    let mut pairs = BTreeSet::new();
    for start in graph.node_ids() {
        let mut stack: Vec<NodeId> = graph.children(start).to_vec();
        let mut seen = BTreeSet::new();
        while let Some(id) = stack.pop() {
            if seen.insert(id) {
                pairs.insert((start, id));
                stack.extend(graph.children(id).iter().copied());
            }
        }
    }
    pairs
}
