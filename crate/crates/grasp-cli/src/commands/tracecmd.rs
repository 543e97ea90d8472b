//! `trace`: pretty-print one persisted traversal trace.

use std::path::Path;

use serde::Deserialize;

use grasp_core::engine::{Gate, Snapshots, TraversalTrace};

use crate::error::{domain, CliError};

#[derive(Deserialize)]
struct TraceFile {
    scenario_id: String,
    sample_index: u32,
    strategy: String,
    trace: TraversalTrace,
    snapshots: Snapshots,
}

pub fn run(path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::environment(format!("cannot read {}: {e}", path.display())))?;
    let file: TraceFile = serde_json::from_str(&text).map_err(domain)?;

    println!(
        "{} sample {} ({}), {} iterations",
        file.scenario_id, file.sample_index, file.strategy, file.trace.iteration_count
    );
    println!(
        "relevant: {{{}}}",
        file.trace.relevant.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ")
    );
    println!("{:>5} {:>28} {:>6} {:>8} {:>10}", "node", "gate", "score", "applied", "diff");

    let mut previous_len =
        file.snapshots.get(grasp_core::engine::SnapshotId(0)).map_or(0, str::len) as i64;
    for entry in &file.trace.entries {
        let gate = match entry.gate {
            Gate::Evaluated => "evaluated",
            Gate::SkippedNoRelevantParent => "skipped (no relevant parent)",
        };
        let score = entry.score.map_or_else(|| "-".to_string(), |s| s.to_string());
        let applied = if entry.applied {
            if entry.apply_noop {
                "yes (noop)"
            } else {
                "yes"
            }
        } else {
            "no"
        };
        let current_len = file.snapshots.get(entry.code_ref).map_or(0, str::len) as i64;
        let diff = current_len - previous_len;
        previous_len = current_len;
        println!("{:>5} {gate:>28} {score:>6} {applied:>8} {diff:>+10}", entry.node_id.to_string());
    }

    if let Some(final_code) = file.snapshots.last() {
        println!("\nfinal code ({} bytes, {} snapshots):", final_code.len(), file.snapshots.len());
        for line in final_code.lines() {
            println!("    {line}");
        }
    }
    Ok(())
}
