//! Shape validation: cycles, reachability, and root conditions.
//!
//! Violations are data, not failures: callers get the full list so a bad
//! document can be fixed in one pass.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{NodeId, ScpGraph};

/// One shape violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// A directed cycle, reported as the node-id sequence around it.
    /// One representative cycle is reported per strongly connected
    /// component.
    Cycle { nodes: Vec<NodeId> },
    /// Node not reachable from the root.
    Unreachable { node: NodeId },
    /// A parentless node other than the declared root.
    ExtraRoot { node: NodeId },
    /// The declared root has an incoming edge.
    RootHasParent { parent: NodeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle { nodes } => {
                let path: Vec<String> = nodes.iter().map(|n| n.to_string()).collect();
                write!(f, "cycle: {}", path.join(" -> "))
            }
            Violation::Unreachable { node } => write!(f, "node {node} unreachable from root"),
            Violation::ExtraRoot { node } => {
                write!(f, "node {node} has no parents but is not the root")
            }
            Violation::RootHasParent { parent } => {
                write!(f, "root has incoming edge from {parent}")
            }
        }
    }
}

/// Every violation found in a graph; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn cycles(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| matches!(v, Violation::Cycle { .. }))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "0 violations");
        }
        writeln!(f, "{} violations", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

pub(super) fn validate(graph: &ScpGraph) -> ValidationReport {
    let mut violations = Vec::new();

    for cycle in find_cycles(graph) {
        violations.push(Violation::Cycle { nodes: cycle });
    }

    for parent in graph.parents(graph.root()) {
        violations.push(Violation::RootHasParent { parent: *parent });
    }

    for id in graph.node_ids() {
        if id != graph.root() && graph.parents(id).is_empty() {
            violations.push(Violation::ExtraRoot { node: id });
        }
    }

    let reachable = graph.reachable_from_root();
    for id in graph.node_ids() {
        if !reachable.contains(&id) {
            violations.push(Violation::Unreachable { node: id });
        }
    }

    ValidationReport { violations }
}

/// One representative cycle per nontrivial strongly connected component,
/// found by Tarjan's algorithm (iterative) and walked from the smallest
/// member id for determinism.
pub(super) fn find_cycles(graph: &ScpGraph) -> Vec<Vec<NodeId>> {
    let ids: Vec<NodeId> = graph.node_ids().collect();
    let index_of = |id: NodeId| ids.binary_search(&id).expect("id from graph");

    const UNDEFINED: i64 = -1;
    let n = ids.len();
    let mut index = vec![UNDEFINED; n];
    let mut lowlink = vec![0i64; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index: i64 = 0;
    let mut components: Vec<Vec<NodeId>> = Vec::new();

    struct Frame {
        node: usize,
        next_child: usize,
    }

    for start in 0..n {
        if index[start] != UNDEFINED {
            continue;
        }
        let mut frames = vec![Frame { node: start, next_child: 0 }];
        index[start] = next_index;
        lowlink[start] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start] = true;

        while let Some(frame) = frames.last_mut() {
            let v = frame.node;
            let children = graph.children(ids[v]);
            if frame.next_child < children.len() {
                let w = index_of(children[frame.next_child]);
                frame.next_child += 1;
                if index[w] == UNDEFINED {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push(Frame { node: w, next_child: 0 });
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                if lowlink[v] == index[v] {
                    let mut members = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        members.push(ids[w]);
                        if w == v {
                            break;
                        }
                    }
                    if members.len() > 1 {
                        members.sort_unstable();
                        components.push(members);
                    }
                }
                let low = lowlink[v];
                frames.pop();
                if let Some(parent) = frames.last() {
                    lowlink[parent.node] = lowlink[parent.node].min(low);
                }
            }
        }
    }

    components.sort();
    components.iter().map(|scc| walk_cycle(graph, scc)).collect()
}

/// Walk one cycle inside an SCC, starting from its smallest id and always
/// taking the smallest in-component successor.
fn walk_cycle(graph: &ScpGraph, scc: &[NodeId]) -> Vec<NodeId> {
    let members: BTreeSet<NodeId> = scc.iter().copied().collect();
    let start = scc[0];
    let mut path = vec![start];
    let mut seen: BTreeSet<NodeId> = BTreeSet::new();
    seen.insert(start);
    let mut current = start;
    loop {
        let next = graph
            .children(current)
            .iter()
            .copied()
            .find(|c| members.contains(c))
            .expect("every SCC member has an in-component successor");
        if next == start {
            return path;
        }
        if !seen.insert(next) {
            // Cycle that does not pass through `start`: trim the tail.
            let pos = path.iter().position(|&n| n == next).expect("seen node");
            return path.split_off(pos);
        }
        path.push(next);
        current = next;
    }
}
