//! Subcommand implementations.

pub mod evalcmd;
pub mod gen;
pub mod graphcmd;
pub mod score;
pub mod tracecmd;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use grasp_core::digest::fnv1a64;
use grasp_core::eval::{read_manifest, Manifest};
use grasp_core::graph::{parse_graph, ScpGraph};
use grasp_core::provider::{
    HttpProvider, PromptSet, Provider, RecordingProvider, ReplayMode, ReplayProvider,
};

use crate::config::RunConfig;
use crate::error::{domain, environment, CliError};

pub fn load_graph(path: &Path) -> Result<ScpGraph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::environment(format!("cannot read {}: {e}", path.display())))?;
    let parsed = parse_graph(&text).map_err(domain)?;
    for warning in &parsed.warnings {
        eprintln!("warning: {}: {warning}", path.display());
    }
    Ok(parsed.graph)
}

pub fn load_manifest(path: &Path) -> Result<Manifest, CliError> {
    read_manifest(path).map_err(|e| match e {
        grasp_core::eval::ScenarioError::Io(io) => {
            CliError::environment(format!("cannot read {}: {io}", path.display()))
        }
        other => domain(other),
    })
}

pub fn load_prompts(config: &RunConfig) -> Result<PromptSet, CliError> {
    match &config.templates_dir {
        Some(dir) => PromptSet::with_overrides(dir).map_err(environment),
        None => Ok(PromptSet::bundled()),
    }
}

/// Build the provider named by the configuration: `replay` (fixtures,
/// strict unless a fallback reply is configured), `live`, or `record`
/// (live wrapped in the transcript recorder).
pub fn build_provider(config: &RunConfig) -> Result<Box<dyn Provider>, CliError> {
    match config.provider_kind.as_str() {
        "replay" => {
            let fixtures = config.fixtures.as_ref().ok_or_else(|| {
                CliError::domain("provider 'replay' needs a fixtures transcript (--fixtures)")
            })?;
            let mode = match &config.fallback_reply {
                Some(reply) => ReplayMode::Lenient { fallback_reply: reply.clone() },
                None => ReplayMode::Strict,
            };
            let provider = ReplayProvider::from_path(fixtures, mode).map_err(|e| {
                CliError::environment(format!("fixtures {}: {e}", fixtures.display()))
            })?;
            Ok(Box::new(provider))
        }
        "live" => Ok(Box::new(HttpProvider::new(config.http.clone()))),
        "record" => {
            let target = config.record_to.as_ref().ok_or_else(|| {
                CliError::domain("provider 'record' needs a transcript path (--record-to)")
            })?;
            if let Some(parent) = target.parent() {
                std::fs::create_dir_all(parent)?;
            }
            let sink = std::fs::OpenOptions::new().create(true).append(true).open(target)?;
            Ok(Box::new(RecordingProvider::new(HttpProvider::new(config.http.clone()), sink)))
        }
        other => Err(CliError::domain(format!(
            "unknown provider {other:?} (expected replay, live, or record)"
        ))),
    }
}

/// Digest manifest of every input file a run consumed, for
/// reproducibility audits.
pub fn write_input_digests(output_dir: &Path, inputs: &[Option<&PathBuf>]) -> Result<(), CliError> {
    let mut digests: BTreeMap<String, String> = BTreeMap::new();
    for path in inputs.iter().flatten() {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::environment(format!("cannot read {}: {e}", path.display())))?;
        digests.insert(path.display().to_string(), fnv1a64(&bytes));
    }
    let json = serde_json::to_string_pretty(&digests).expect("digest map serializes");
    std::fs::write(output_dir.join("inputs.json"), json + "\n")?;
    Ok(())
}
