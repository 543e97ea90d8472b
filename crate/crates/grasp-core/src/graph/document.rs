//! The on-disk graph document format.
//!
//! UTF-8 JSON, top level:
//!
//! ```json
//! {
//!   "version": "1",
//!   "root": 0,
//!   "nodes": [{"id": 0, "text": "...", "children": [1, 2], "tags": ["CWE-022"]}],
//!   "edge_kinds": [{"from": 0, "to": 1, "kind": "sequential"}]
//! }
//! ```
//!
//! Children lists are directed parent → child edges with kind
//! `specificity` unless an `edge_kinds` entry (inline or from an overlay
//! file) says otherwise. Unknown fields are ignored with a warning so a
//! document written by a newer tool still loads.

use serde_json::Value;

use super::{EdgeKind, GraphError, NodeId, ScpEdge, ScpGraph, ScpNode};

/// Errors raised while reading a graph document.
#[derive(Debug, thiserror::Error)]
pub enum DocumentError {
    #[error("document is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation at {field}: {message}")]
    Schema { field: String, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A parsed document: the graph plus any warnings produced on the way.
#[derive(Debug)]
pub struct ParsedGraph {
    pub graph: ScpGraph,
    pub warnings: Vec<String>,
}

fn schema(field: &str, message: impl Into<String>) -> DocumentError {
    DocumentError::Schema { field: field.to_string(), message: message.into() }
}

fn as_u32(value: &Value, field: &str) -> Result<u32, DocumentError> {
    value
        .as_u64()
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| schema(field, "expected a non-negative integer"))
}

/// Parse a graph document, checking structural invariants. Layout
/// violations (cycles, unreachable nodes) are left to
/// [`ScpGraph::validate`] so they can all be reported together.
pub fn parse_graph(document: &str) -> Result<ParsedGraph, DocumentError> {
    let value: Value = serde_json::from_str(document)?;
    let obj = value.as_object().ok_or_else(|| schema("$", "expected a top-level object"))?;

    let mut warnings = Vec::new();
    for key in obj.keys() {
        if !matches!(key.as_str(), "version" | "root" | "nodes" | "edge_kinds") {
            warnings.push(format!("ignoring unknown field {key:?}"));
        }
    }

    if let Some(v) = obj.get("version") {
        if !v.is_string() {
            return Err(schema("version", "expected a string"));
        }
    }

    let root = NodeId(as_u32(
        obj.get("root").ok_or_else(|| schema("root", "missing required field"))?,
        "root",
    )?);

    let raw_nodes = obj
        .get("nodes")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("nodes", "expected an array"))?;

    let mut nodes = Vec::with_capacity(raw_nodes.len());
    let mut edges = Vec::new();
    for (i, raw) in raw_nodes.iter().enumerate() {
        let node_obj =
            raw.as_object().ok_or_else(|| schema(&format!("nodes[{i}]"), "expected an object"))?;
        for key in node_obj.keys() {
            if !matches!(key.as_str(), "id" | "text" | "children" | "tags") {
                warnings.push(format!("ignoring unknown field nodes[{i}].{key}"));
            }
        }
        let id = NodeId(as_u32(
            node_obj
                .get("id")
                .ok_or_else(|| schema(&format!("nodes[{i}].id"), "missing required field"))?,
            &format!("nodes[{i}].id"),
        )?);
        let text = node_obj
            .get("text")
            .and_then(Value::as_str)
            .ok_or_else(|| schema(&format!("nodes[{i}].text"), "expected a string"))?
            .to_string();
        let tags = match node_obj.get("tags") {
            None => Vec::new(),
            Some(v) => v
                .as_array()
                .ok_or_else(|| schema(&format!("nodes[{i}].tags"), "expected an array"))?
                .iter()
                .map(|t| {
                    t.as_str().map(str::to_string).ok_or_else(|| {
                        schema(&format!("nodes[{i}].tags"), "expected string entries")
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        let children = match node_obj.get("children") {
            None => Vec::new(),
            Some(v) => v
                .as_array()
                .ok_or_else(|| schema(&format!("nodes[{i}].children"), "expected an array"))?
                .iter()
                .map(|c| as_u32(c, &format!("nodes[{i}].children")))
                .collect::<Result<Vec<_>, _>>()?,
        };
        for child in children {
            edges.push(ScpEdge { from: id, to: NodeId(child), kind: EdgeKind::Specificity });
        }
        nodes.push(ScpNode { id, text, tags });
    }

    if let Some(raw_kinds) = obj.get("edge_kinds") {
        let overlay = parse_overlay_value(raw_kinds, "edge_kinds")?;
        apply_overlay(&mut edges, &overlay, &mut warnings);
    }

    let graph = ScpGraph::new(nodes, edges, root)?;
    Ok(ParsedGraph { graph, warnings })
}

/// One edge-kind override, as found inline or in an overlay file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeKindOverride {
    pub from: NodeId,
    pub to: NodeId,
    pub kind: EdgeKind,
}

/// Parse a standalone overlay document: a JSON array of
/// `{"from": .., "to": .., "kind": "specificity"|"sequential"}`.
pub fn parse_overlay(document: &str) -> Result<Vec<EdgeKindOverride>, DocumentError> {
    let value: Value = serde_json::from_str(document)?;
    parse_overlay_value(&value, "$")
}

fn parse_overlay_value(value: &Value, field: &str) -> Result<Vec<EdgeKindOverride>, DocumentError> {
    let arr = value.as_array().ok_or_else(|| schema(field, "expected an array"))?;
    let mut overrides = Vec::with_capacity(arr.len());
    for (i, raw) in arr.iter().enumerate() {
        let obj = raw
            .as_object()
            .ok_or_else(|| schema(&format!("{field}[{i}]"), "expected an object"))?;
        let from = NodeId(as_u32(
            obj.get("from")
                .ok_or_else(|| schema(&format!("{field}[{i}].from"), "missing required field"))?,
            &format!("{field}[{i}].from"),
        )?);
        let to = NodeId(as_u32(
            obj.get("to")
                .ok_or_else(|| schema(&format!("{field}[{i}].to"), "missing required field"))?,
            &format!("{field}[{i}].to"),
        )?);
        let kind = match obj.get("kind").and_then(Value::as_str) {
            Some("specificity") => EdgeKind::Specificity,
            Some("sequential") => EdgeKind::Sequential,
            _ => {
                return Err(schema(
                    &format!("{field}[{i}].kind"),
                    "expected \"specificity\" or \"sequential\"",
                ))
            }
        };
        overrides.push(EdgeKindOverride { from, to, kind });
    }
    Ok(overrides)
}

/// Apply kind overrides to an edge list; overrides naming absent edges
/// produce a warning rather than an error so overlays survive graph edits.
pub fn apply_overlay(
    edges: &mut [ScpEdge],
    overlay: &[EdgeKindOverride],
    warnings: &mut Vec<String>,
) {
    for ov in overlay {
        match edges.iter_mut().find(|e| e.from == ov.from && e.to == ov.to) {
            Some(edge) => edge.kind = ov.kind,
            None => warnings.push(format!(
                "edge kind override {} -> {} names an edge that is not in the document",
                ov.from, ov.to
            )),
        }
    }
}

/// Serialize a graph back to the document format, children lists sorted,
/// with `edge_kinds` entries only for sequential edges.
pub fn to_document_json(graph: &ScpGraph) -> String {
    let nodes: Vec<Value> = graph
        .nodes()
        .map(|node| {
            let mut obj = serde_json::Map::new();
            obj.insert("id".into(), node.id.0.into());
            obj.insert("text".into(), node.text.clone().into());
            obj.insert(
                "children".into(),
                Value::Array(graph.children(node.id).iter().map(|c| c.0.into()).collect()),
            );
            if !node.tags.is_empty() {
                obj.insert(
                    "tags".into(),
                    Value::Array(node.tags.iter().map(|t| t.clone().into()).collect()),
                );
            }
            Value::Object(obj)
        })
        .collect();

    let kinds: Vec<Value> = graph
        .edges()
        .filter(|e| e.kind == EdgeKind::Sequential)
        .map(|e| serde_json::json!({"from": e.from.0, "to": e.to.0, "kind": "sequential"}))
        .collect();

    let mut doc = serde_json::Map::new();
    doc.insert("version".into(), "1".into());
    doc.insert("root".into(), graph.root().0.into());
    doc.insert("nodes".into(), Value::Array(nodes));
    if !kinds.is_empty() {
        doc.insert("edge_kinds".into(), Value::Array(kinds));
    }
    serde_json::to_string_pretty(&Value::Object(doc)).expect("document serializes") + "\n"
}
