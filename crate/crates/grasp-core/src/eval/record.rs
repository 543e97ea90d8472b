//! Run records: one generated sample with its evaluation outcomes.
//!
//! The store is append-only JSON Lines, one record per line. Invariants
//! (`secure ⇒ valid`, `tests_passed ⇒ valid`) are enforced both when
//! records are built and when a store is read back.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use super::analyzer::Finding;
use crate::provider::Usage;

/// Whether a sample's evaluation is usable for metrics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    /// Evaluated normally.
    #[default]
    Ok,
    /// The security analyzer itself failed; excluded from metrics.
    AnalysisFailed,
    /// The evaluation environment was broken (missing toolchain);
    /// excluded from metrics and flagged on the run.
    Environment,
}

/// One generated sample and everything measured about it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario_id: String,
    pub strategy: String,
    pub model_id: String,
    pub sample_index: u32,
    pub code: String,
    pub valid: bool,
    #[serde(default)]
    pub findings: Vec<Finding>,
    pub secure: bool,
    pub tests_passed: bool,
    pub usage: Usage,
    pub iterations: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_ref: Option<String>,
    #[serde(default)]
    pub status: RecordStatus,
}

/// Record construction/read failures.
#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("record for {scenario_id} sample {sample_index}: {message}")]
    Invariant { scenario_id: String, sample_index: u32, message: String },
    #[error("run store io: {0}")]
    Io(#[from] std::io::Error),
    #[error("run store line {line}: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

impl RunRecord {
    /// Build a record, deriving `secure` from the findings: secure iff
    /// the sample is valid and no finding matches the scenario's rule.
    #[allow(clippy::too_many_arguments)]
    pub fn evaluated(
        scenario_id: impl Into<String>,
        strategy: impl Into<String>,
        model_id: impl Into<String>,
        sample_index: u32,
        code: impl Into<String>,
        valid: bool,
        findings: Vec<Finding>,
        analyzer_rule: &str,
        tests_passed: bool,
        usage: Usage,
        iterations: u32,
        trace_ref: Option<String>,
        status: RecordStatus,
    ) -> Result<Self, RecordError> {
        let rule_findings = findings.iter().any(|f| f.rule_id == analyzer_rule);
        let record = RunRecord {
            scenario_id: scenario_id.into(),
            strategy: strategy.into(),
            model_id: model_id.into(),
            sample_index,
            code: code.into(),
            valid,
            findings,
            secure: valid && !rule_findings && status == RecordStatus::Ok,
            tests_passed: tests_passed && valid,
            usage,
            iterations,
            trace_ref,
            status,
        };
        record.check()?;
        Ok(record)
    }

    /// Invariants that must hold for any record, stored or constructed.
    pub fn check(&self) -> Result<(), RecordError> {
        let fail = |message: &str| {
            Err(RecordError::Invariant {
                scenario_id: self.scenario_id.clone(),
                sample_index: self.sample_index,
                message: message.to_string(),
            })
        };
        if self.secure && !self.valid {
            return fail("secure implies valid");
        }
        if self.tests_passed && !self.valid {
            return fail("tests_passed implies valid");
        }
        Ok(())
    }

    /// Metrics population check: analysis failures and environment
    /// errors are excluded from every numerator and denominator.
    pub fn countable(&self) -> bool {
        self.status == RecordStatus::Ok
    }
}

/// Append records to a writer, one JSON object per line.
pub fn write_run_records(mut writer: impl Write, records: &[RunRecord]) -> Result<(), RecordError> {
    for record in records {
        record.check()?;
        let line = serde_json::to_string(record)
            .map_err(|source| RecordError::Malformed { line: 0, source })?;
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

/// Read a run store, rejecting records that violate the invariants.
pub fn read_run_records(reader: impl Read) -> Result<Vec<RunRecord>, RecordError> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RunRecord = serde_json::from_str(&line)
            .map_err(|source| RecordError::Malformed { line: i + 1, source })?;
        record.check()?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
pub(crate) fn test_record(
    scenario_id: &str,
    sample_index: u32,
    secure: bool,
    tests: bool,
) -> RunRecord {
    RunRecord {
        scenario_id: scenario_id.to_string(),
        strategy: "grasp".to_string(),
        model_id: "replay".to_string(),
        sample_index,
        code: "x = 1".to_string(),
        valid: true,
        findings: Vec::new(),
        secure,
        tests_passed: tests,
        usage: Usage::one_call(100, 50),
        iterations: 3,
        trace_ref: None,
        status: RecordStatus::Ok,
    }
}
