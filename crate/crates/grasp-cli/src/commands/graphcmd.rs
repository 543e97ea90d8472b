//! `graph validate | reduce | build | review`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use grasp_core::builder::{
    assemble_and_repair, classify_pairs, export_review, import_review, normalize_practices,
    read_practices, BuilderError, ExclusionFilter, RepairLog,
};
use grasp_core::graph::to_document_json;

use crate::commands::{build_provider, load_graph};
use crate::config::RunConfig;
use crate::error::{domain, CliError};

pub fn validate(graph_path: &Path) -> Result<(), CliError> {
    let graph = load_graph(graph_path)?;
    let report = graph.validate();
    println!("{report}");
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError::domain(format!("{} failed validation", graph_path.display())))
    }
}

pub fn reduce(graph_path: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let graph = load_graph(graph_path)?;
    let reduction = graph.transitive_reduce().map_err(domain)?;
    for edge in &reduction.removed {
        println!("removed {} -> {} ({})", edge.from, edge.to, edge.kind);
    }
    if reduction.removed.is_empty() {
        println!("already minimal, no edges removed");
    }
    let doc = to_document_json(&reduction.graph);
    match output {
        Some(path) => std::fs::write(path, doc)?,
        None => print!("{doc}"),
    }
    Ok(())
}

pub struct BuildArgs {
    pub practices: PathBuf,
    pub root: String,
    pub exclude: Option<PathBuf>,
    pub output: PathBuf,
    pub review_output: Option<PathBuf>,
    pub records_output: Option<PathBuf>,
}

pub fn build(config: &RunConfig, args: &BuildArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.practices).map_err(|e| {
        CliError::environment(format!("cannot read {}: {e}", args.practices.display()))
    })?;
    let raw = read_practices(&text);
    let filter =
        match &args.exclude {
            Some(path) => ExclusionFilter::parse(&std::fs::read_to_string(path).map_err(|e| {
                CliError::environment(format!("cannot read {}: {e}", path.display()))
            })?),
            None => ExclusionFilter::default(),
        };

    let provider = build_provider(config)?;
    let prompts = crate::commands::load_prompts(config)?;

    let records = normalize_practices(&raw, provider.as_ref(), &prompts, &filter)
        .map_err(|e| builder_abort(e, "normalized"))?;
    if let Some(path) = &args.records_output {
        std::fs::write(path, serde_json::to_string_pretty(&records).expect("records serialize"))?;
    }

    let classifications = classify_pairs(&records, provider.as_ref(), &prompts)
        .map_err(|e| builder_abort(e, "classified"))?;

    let assembled = assemble_and_repair(&classifications, &records, &args.root).map_err(domain)?;
    std::fs::write(&args.output, to_document_json(&assembled.graph))?;
    println!(
        "built graph: {} nodes, {} edges, {} repairs",
        assembled.graph.node_count(),
        assembled.graph.edge_count(),
        assembled.log.events.len()
    );

    if let Some(path) = &args.review_output {
        std::fs::write(
            path,
            export_review(&assembled.graph, &assembled.log, &assembled.provenance),
        )?;
    }
    Ok(())
}

/// Provider aborts leave a partial file next to the target so a rerun
/// with a recording transcript can resume cheaply.
fn builder_abort(e: BuilderError, _stage: &str) -> CliError {
    match e {
        BuilderError::Aborted { stage, completed, source, partial_json } => {
            let partial_path = format!("partial-{stage}.json");
            let note = match std::fs::write(&partial_path, partial_json) {
                Ok(()) => format!("; {completed} finished items saved to {partial_path}"),
                Err(_) => String::new(),
            };
            CliError::environment(format!("provider failed during {stage}: {source}{note}"))
        }
        other => domain(other),
    }
}

pub struct ReviewArgs {
    pub graph: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub import: Option<PathBuf>,
}

pub fn review(args: &ReviewArgs) -> Result<(), CliError> {
    if let Some(review_path) = &args.import {
        let text = std::fs::read_to_string(review_path).map_err(|e| {
            CliError::environment(format!("cannot read {}: {e}", review_path.display()))
        })?;
        let overrides = import_review(&text).map_err(domain)?;
        let overlay: Vec<serde_json::Value> = overrides
            .iter()
            .map(|o| {
                serde_json::json!({
                    "from": o.from.0,
                    "to": o.to.0,
                    "kind": o.kind.to_string(),
                })
            })
            .collect();
        let json = serde_json::to_string_pretty(&overlay).expect("overlay serializes") + "\n";
        match &args.output {
            Some(path) => std::fs::write(path, json)?,
            None => print!("{json}"),
        }
        return Ok(());
    }

    let graph_path = args.graph.as_ref().ok_or_else(|| {
        CliError::usage("graph review needs a graph document (or --import <review>)")
    })?;
    let graph = load_graph(graph_path)?;
    let review = export_review(&graph, &RepairLog::default(), &BTreeMap::new());
    match &args.output {
        Some(path) => std::fs::write(path, review)?,
        None => print!("{review}"),
    }
    Ok(())
}
