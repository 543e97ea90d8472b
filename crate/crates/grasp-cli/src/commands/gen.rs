//! `gen`: produce run records for scenarios × samples under a strategy.
//!
//! Samples fan out over a worker pool but land in the store in
//! (scenario, sample) order: a writer thread buffers out-of-order
//! completions and appends each record the moment its predecessors are
//! down, flushing per record. An interrupted run therefore leaves a
//! well-formed prefix of the store rather than an interleaved mess.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::Serialize;

use grasp_core::engine::{run_strategy, StrategyError, Traversal, TraversalError};
use grasp_core::eval::{RecordStatus, RunRecord, Scenario};
use grasp_core::graph::ScpGraph;
use grasp_core::provider::{PromptSet, Provider};

use crate::commands::{
    build_provider, load_graph, load_manifest, load_prompts, write_input_digests,
};
use crate::config::RunConfig;
use crate::error::{domain, CliError};

/// Persisted per-sample trace: the gate decisions plus every code
/// snapshot, enough to audit the whole refinement offline.
#[derive(Serialize)]
struct TraceFile<'a> {
    scenario_id: &'a str,
    sample_index: u32,
    strategy: &'a str,
    trace: &'a grasp_core::engine::TraversalTrace,
    snapshots: &'a grasp_core::engine::Snapshots,
}

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let manifest_path = config
        .manifest_path
        .as_ref()
        .ok_or_else(|| CliError::domain("gen needs a scenario manifest (--manifest)"))?;
    let manifest = load_manifest(manifest_path)?;

    let graph: Option<ScpGraph> = match (&config.graph_path, config.strategy.needs_graph()) {
        (Some(path), _) => Some(load_graph(path)?),
        (None, true) => {
            return Err(CliError::domain(format!(
                "strategy {} requires a practice graph (--graph)",
                config.strategy
            )))
        }
        (None, false) => None,
    };

    let provider = build_provider(config)?;
    let prompts = load_prompts(config)?;

    std::fs::create_dir_all(&config.output_dir)?;
    let traces_dir = config.output_dir.join("traces");
    std::fs::create_dir_all(&traces_dir)?;
    write_input_digests(
        &config.output_dir,
        &[config.manifest_path.as_ref(), config.graph_path.as_ref(), config.fixtures.as_ref()],
    )?;

    let jobs: Vec<(&Scenario, u32)> = manifest
        .scenarios
        .iter()
        .flat_map(|s| (0..config.samples_per_scenario).map(move |i| (s, i)))
        .collect();

    let store_path = config.output_dir.join("run.jsonl");
    let store = std::fs::File::create(&store_path)?;
    let mut writer = std::io::BufWriter::new(store);

    let next_job = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Result<RunRecord, CliError>)>();

    std::thread::scope(|scope| -> Result<(), CliError> {
        for _ in 0..config.workers.min(jobs.len().max(1)) {
            let tx = tx.clone();
            let jobs = &jobs;
            let next_job = &next_job;
            let graph = graph.as_ref();
            let provider: &dyn Provider = provider.as_ref();
            let prompts = &prompts;
            let traces_dir = &traces_dir;
            scope.spawn(move || loop {
                let index = next_job.fetch_add(1, Ordering::SeqCst);
                if index >= jobs.len() {
                    break;
                }
                let (scenario, sample) = jobs[index];
                let result =
                    generate_one(config, scenario, sample, graph, provider, prompts, traces_dir);
                if tx.send((index, result)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        // Ordered writer: hold out-of-order results until their turn.
        let mut pending: BTreeMap<usize, Result<RunRecord, CliError>> = BTreeMap::new();
        let mut next_write = 0usize;
        let mut first_error: Option<CliError> = None;
        for (index, result) in rx {
            pending.insert(index, result);
            while let Some(result) = pending.remove(&next_write) {
                next_write += 1;
                match result {
                    Ok(record) => {
                        let line = serde_json::to_string(&record).map_err(domain)?;
                        writeln!(writer, "{line}")?;
                        writer.flush()?;
                    }
                    Err(e) => {
                        if first_error.is_none() {
                            first_error = Some(e);
                        }
                    }
                }
            }
        }
        match first_error {
            Some(e) => Err(e),
            None => Ok(()),
        }
    })?;

    println!(
        "wrote {} ({} scenarios x {} samples, strategy {})",
        store_path.display(),
        manifest.scenarios.len(),
        config.samples_per_scenario,
        config.strategy
    );
    Ok(())
}

fn generate_one(
    config: &RunConfig,
    scenario: &Scenario,
    sample: u32,
    graph: Option<&ScpGraph>,
    provider: &dyn Provider,
    prompts: &PromptSet,
    traces_dir: &Path,
) -> Result<RunRecord, CliError> {
    let run = run_strategy(config.strategy, scenario, graph, provider, prompts, config.tau)
        .map_err(|e| {
            // An aborted traversal still leaves its partial trace on disk
            // for diagnosis.
            if let StrategyError::Traversal(TraversalError::Aborted { partial, .. }) = &e {
                let name = format!("{}__{sample:03}__partial.json", scenario.id);
                let file = TraceFile {
                    scenario_id: &scenario.id,
                    sample_index: sample,
                    strategy: config.strategy.name(),
                    trace: &partial.trace,
                    snapshots: &partial.snapshots,
                };
                if let Ok(json) = serde_json::to_string_pretty(&file) {
                    let _ = std::fs::write(traces_dir.join(name), json + "\n");
                }
            }
            classify_strategy_error(e)
        })?;

    let trace_ref = match &run.traversal {
        Some(traversal) => Some(write_trace(traces_dir, scenario, sample, config, traversal)?),
        None => None,
    };

    // Generation only: validity, findings, and test outcomes are the
    // eval phase's job.
    RunRecord::evaluated(
        &scenario.id,
        config.strategy.name(),
        &config.model_id,
        sample,
        run.code,
        false,
        Vec::new(),
        &scenario.analyzer_rule,
        false,
        run.usage,
        run.iterations,
        trace_ref,
        RecordStatus::Ok,
    )
    .map_err(domain)
}

fn write_trace(
    traces_dir: &Path,
    scenario: &Scenario,
    sample: u32,
    config: &RunConfig,
    traversal: &Traversal,
) -> Result<String, CliError> {
    let name = format!("{}__{sample:03}.json", scenario.id);
    let file = TraceFile {
        scenario_id: &scenario.id,
        sample_index: sample,
        strategy: config.strategy.name(),
        trace: &traversal.trace,
        snapshots: &traversal.snapshots,
    };
    let json = serde_json::to_string_pretty(&file).map_err(domain)? + "\n";
    std::fs::write(traces_dir.join(&name), json)?;
    Ok(format!("traces/{name}"))
}

/// Transport-class failures are environment errors (exit 2); anything
/// about the inputs — unknown strategy, missing graph, replay misses,
/// bad templates — is a domain error (exit 1).
fn classify_strategy_error(e: StrategyError) -> CliError {
    use grasp_core::provider::ProviderError;
    let transport = match &e {
        StrategyError::Provider(p) => p.is_transport(),
        StrategyError::Traversal(grasp_core::engine::TraversalError::Aborted {
            source, ..
        }) => matches!(source, ProviderError::Transport(_) | ProviderError::EmptyReply(_)),
        _ => false,
    };
    if transport {
        CliError::environment(e.to_string())
    } else {
        domain(e)
    }
}
