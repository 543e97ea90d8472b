//! Human-review export and re-import.
//!
//! The review document is plain text: every node, every edge with its
//! kind and provenance, and the repair log. Experts edit the kind column
//! (or delete edge lines) and the edge section re-imports as a kind
//! overlay for the graph document format.

use std::collections::BTreeMap;

use super::assemble::{EdgeProvenance, RepairAction, RepairLog};
use crate::graph::{EdgeKind, EdgeKindOverride, NodeId, ScpGraph};

/// Render the review document.
pub fn export_review(
    graph: &ScpGraph,
    log: &RepairLog,
    provenance: &BTreeMap<(NodeId, NodeId), EdgeProvenance>,
) -> String {
    let mut out = String::new();
    out.push_str("# SCP graph review\n");
    out.push_str(&format!(
        "# nodes: {}  edges: {}  root: {}\n\n",
        graph.node_count(),
        graph.edge_count(),
        graph.root()
    ));

    out.push_str("## Nodes\n");
    for node in graph.nodes() {
        if node.tags.is_empty() {
            out.push_str(&format!("[{}] {}\n", node.id, node.text));
        } else {
            out.push_str(&format!("[{}] {}  {{{}}}\n", node.id, node.text, node.tags.join(", ")));
        }
    }

    out.push_str("\n## Edges\n");
    for edge in graph.edges() {
        let origin = match provenance.get(&(edge.from, edge.to)) {
            Some(EdgeProvenance::Classified { confidence }) => {
                format!("classified {confidence:.2}")
            }
            Some(EdgeProvenance::Attached) => "attached".to_string(),
            Some(EdgeProvenance::Curated) | None => "curated".to_string(),
        };
        out.push_str(&format!("{} -> {}  {}  {}\n", edge.from, edge.to, edge.kind, origin));
    }

    out.push_str("\n## Repairs\n");
    if log.is_empty() {
        out.push_str("(none)\n");
    }
    for event in &log.events {
        let verb = match event.action {
            RepairAction::RootIncomingRemoval => "removed (root-incoming)",
            RepairAction::CycleRemoval => "removed (cycle)",
            RepairAction::RedundantRemoval => "removed (redundant)",
            RepairAction::RootAttachment => "attached (parentless)",
        };
        match event.confidence {
            Some(c) => {
                out.push_str(&format!("{verb} {} -> {}  confidence {c:.2}\n", event.from, event.to))
            }
            None => out.push_str(&format!("{verb} {} -> {}\n", event.from, event.to)),
        }
    }
    out
}

/// Review documents that cannot be re-imported.
#[derive(Debug, thiserror::Error)]
pub enum ReviewParseError {
    #[error("review has no '## Edges' section")]
    MissingEdgeSection,
    #[error("review edge line {line}: {message}")]
    BadEdgeLine { line: usize, message: String },
}

/// Parse the edge section of an edited review back into kind overrides.
pub fn import_review(text: &str) -> Result<Vec<EdgeKindOverride>, ReviewParseError> {
    let mut in_edges = false;
    let mut seen_section = false;
    let mut overrides = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.starts_with("## ") {
            in_edges = trimmed == "## Edges";
            seen_section |= in_edges;
            continue;
        }
        if !in_edges || trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let bad = |message: &str| ReviewParseError::BadEdgeLine {
            line: i + 1,
            message: message.to_string(),
        };
        let mut parts = trimmed.split_whitespace();
        let from: u32 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("expected a source node id"))?;
        if parts.next() != Some("->") {
            return Err(bad("expected '->'"));
        }
        let to: u32 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("expected a target node id"))?;
        let kind = match parts.next() {
            Some("specificity") => EdgeKind::Specificity,
            Some("sequential") => EdgeKind::Sequential,
            _ => return Err(bad("expected 'specificity' or 'sequential'")),
        };
        overrides.push(EdgeKindOverride { from: NodeId(from), to: NodeId(to), kind });
    }
    if !seen_section {
        return Err(ReviewParseError::MissingEdgeSection);
    }
    Ok(overrides)
}
