//! Evaluation toolkit: scenarios, run records, validity and test
//! execution, security analysis adapters, and the metrics.
//!
//! A [`Scenario`] is one natural-language coding task labeled with a CWE,
//! an analyzer rule, and command templates for validity checking and
//! functional tests. Each generated sample becomes a [`RunRecord`]; the
//! metrics roll records up into a [`report::MetricsReport`].

pub mod analyzer;
pub mod metrics;
pub mod report;
pub mod sandbox;

mod record;
pub(crate) mod scenario;

pub use analyzer::{
    analyze_security, builtin_rules, AnalyzerConfig, AnalyzerError, Finding, PatternRule,
};
pub use metrics::{
    scenario_counts, secure_pass_at_k, security_rate, security_rate_counts, MetricsError,
    ScenarioCounts,
};
pub use record::{read_run_records, write_run_records, RecordError, RecordStatus, RunRecord};
pub use report::{aggregate_report, CostSummary, MetricsReport, RollupRow, ScenarioRow};
pub use sandbox::{check_validity, run_tests, CommandOutcome, SandboxError};
pub use scenario::{read_manifest, Manifest, Scenario, ScenarioError};
