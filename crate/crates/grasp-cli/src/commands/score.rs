//! `score`: metrics report over an evaluated run store.

use std::collections::BTreeMap;
use std::path::PathBuf;

use grasp_core::eval::{aggregate_report, read_run_records, MetricsError};

use crate::commands::load_manifest;
use crate::config::RunConfig;
use crate::error::{domain, CliError};

pub struct ScoreArgs {
    pub run_store: PathBuf,
    pub output_dir: Option<PathBuf>,
}

pub fn run(config: &RunConfig, args: &ScoreArgs) -> Result<(), CliError> {
    let file = std::fs::File::open(&args.run_store).map_err(|e| {
        CliError::environment(format!("cannot read {}: {e}", args.run_store.display()))
    })?;
    let records = read_run_records(file).map_err(domain)?;

    // CWE labels come from the manifest when configured; without one the
    // rollup collapses into a single "(unknown)" group.
    let cwe_by_scenario: BTreeMap<String, String> = match &config.manifest_path {
        Some(path) => load_manifest(path)?.scenarios.into_iter().map(|s| (s.id, s.cwe)).collect(),
        None => BTreeMap::new(),
    };

    let report = aggregate_report(&records, &config.ks, &config.pricing, &cwe_by_scenario)
        .map_err(|e| match e {
            MetricsError::EmptyScope => CliError::domain("run store has no records"),
            other => domain(other),
        })?;

    let text = report.render_text();
    print!("{text}");

    if let Some(dir) = &args.output_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), report.to_json())?;
        std::fs::write(dir.join("report.txt"), &text)?;
        println!("wrote {}/report.json and report.txt", dir.display());
    }
    Ok(())
}
