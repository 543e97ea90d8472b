//! `eval`: validity, security analysis, and functional tests over a run
//! store. Generation and evaluation are separate phases so expensive
//! model output can be archived once and re-scored offline.
//!
//! Evaluation fans out across worker threads — every sample gets its own
//! temp workspace — and lands in the output store in input order via the
//! same ordered-writer scheme `gen` uses.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use grasp_core::eval::{
    analyze_security, check_validity, read_run_records, run_tests, AnalyzerConfig, Manifest,
    RecordStatus, RunRecord, SandboxError, Scenario,
};

use crate::commands::load_manifest;
use crate::error::{domain, CliError};

pub struct EvalArgs {
    pub run_store: PathBuf,
    pub manifest: PathBuf,
    pub output: PathBuf,
    pub analyzer_cmd: Option<String>,
    pub workers: usize,
}

pub fn run(args: &EvalArgs) -> Result<(), CliError> {
    let manifest = load_manifest(&args.manifest)?;
    let file = std::fs::File::open(&args.run_store).map_err(|e| {
        CliError::environment(format!("cannot read {}: {e}", args.run_store.display()))
    })?;
    let records = read_run_records(file).map_err(domain)?;

    let analyzer = match &args.analyzer_cmd {
        Some(template) => AnalyzerConfig::Command { template: template.clone() },
        None => AnalyzerConfig::default(),
    };

    if let Some(parent) = args.output.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let out = std::fs::File::create(&args.output)?;
    let mut writer = std::io::BufWriter::new(out);

    let next_job = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Result<RunRecord, CliError>)>();

    std::thread::scope(|scope| -> Result<(), CliError> {
        for _ in 0..args.workers.max(1).min(records.len().max(1)) {
            let tx = tx.clone();
            let next_job = &next_job;
            let records = &records;
            let manifest = &manifest;
            let analyzer = &analyzer;
            scope.spawn(move || loop {
                let index = next_job.fetch_add(1, Ordering::SeqCst);
                if index >= records.len() {
                    break;
                }
                let result = evaluate_one(records[index].clone(), manifest, analyzer);
                if tx.send((index, result)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending: BTreeMap<usize, Result<RunRecord, CliError>> = BTreeMap::new();
        let mut next_write = 0usize;
        let mut first_error: Option<CliError> = None;
        let mut environment_failures = 0u64;
        let mut analysis_failures = 0u64;
        for (index, result) in rx {
            pending.insert(index, result);
            while let Some(result) = pending.remove(&next_write) {
                next_write += 1;
                match result {
                    Ok(evaluated) => {
                        match evaluated.status {
                            RecordStatus::Environment => environment_failures += 1,
                            RecordStatus::AnalysisFailed => analysis_failures += 1,
                            RecordStatus::Ok => {}
                        }
                        let line = serde_json::to_string(&evaluated).map_err(domain)?;
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
        if environment_failures > 0 {
            eprintln!(
                "warning: {environment_failures} samples hit environment errors and were excluded"
            );
        }
        if analysis_failures > 0 {
            eprintln!("warning: {analysis_failures} samples failed analysis and were excluded");
        }
        match first_error {
            Some(e) => Err(e),
            None => Ok(()),
        }
    })?;

    println!("wrote {}", args.output.display());
    Ok(())
}

fn evaluate_one(
    record: RunRecord,
    manifest: &Manifest,
    analyzer: &AnalyzerConfig,
) -> Result<RunRecord, CliError> {
    let scenario =
        manifest.scenarios.iter().find(|s| s.id == record.scenario_id).ok_or_else(|| {
            CliError::domain(format!(
                "run store references scenario {:?} missing from the manifest",
                record.scenario_id
            ))
        })?;

    let (valid, mut status) = match check_validity(&record.code, scenario) {
        Ok(outcome) => (outcome.passed, RecordStatus::Ok),
        Err(SandboxError::MissingTool { program }) => {
            report_environment(scenario, &record, &program);
            (false, RecordStatus::Environment)
        }
        Err(e) => return Err(CliError::environment(e.to_string())),
    };

    // Analysis and tests only make sense for valid samples; invalid ones
    // are insecure-by-definition and functionally incorrect.
    let mut findings = Vec::new();
    if valid && status == RecordStatus::Ok {
        match analyze_security(
            analyzer,
            &record.code,
            &scenario.code_filename,
            &scenario.analyzer_rule,
        ) {
            Ok(found) => findings = found,
            Err(e) => {
                eprintln!(
                    "analysis failed: {} sample {}: {e}",
                    record.scenario_id, record.sample_index
                );
                status = RecordStatus::AnalysisFailed;
            }
        }
    }

    let tests_passed = if valid && status == RecordStatus::Ok {
        match run_tests(&record.code, scenario, &manifest.base_dir) {
            Ok(outcome) => outcome.passed,
            Err(SandboxError::MissingTool { program }) => {
                report_environment(scenario, &record, &program);
                status = RecordStatus::Environment;
                false
            }
            Err(e) => return Err(CliError::environment(e.to_string())),
        }
    } else {
        false
    };

    RunRecord::evaluated(
        record.scenario_id,
        record.strategy,
        record.model_id,
        record.sample_index,
        record.code,
        valid,
        findings,
        &scenario.analyzer_rule,
        tests_passed,
        record.usage,
        record.iterations,
        record.trace_ref,
        status,
    )
    .map_err(domain)
}

fn report_environment(scenario: &Scenario, record: &RunRecord, program: &str) {
    eprintln!("environment: {} sample {}: {program:?} not found", scenario.id, record.sample_index);
}
