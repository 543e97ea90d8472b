//! Security analysis adapters.
//!
//! Two adapters ship in-tree:
//!
//! - A built-in pattern analyzer with a small set of line-level regex
//!   rules. Hermetic — no external tools — and good enough to drive the
//!   pipeline end to end in tests and demos.
//! - An external-command adapter for real analyzers. The command template
//!   gets `{file}` and `{rule}` substituted, and must print a UTF-8 JSON
//!   array of `{"rule_id": string, "message": string, "line": int}` to
//!   stdout. Exit 0 means the analysis ran (findings may be non-empty);
//!   a nonzero exit is an analysis error and the sample is excluded from
//!   metrics and reported.

use std::path::Path;
use std::process::Command;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// One analyzer finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub rule_id: String,
    pub message: String,
    pub line: u32,
}

/// Which adapter to run.
#[derive(Debug, Clone)]
pub enum AnalyzerConfig {
    /// In-process pattern rules.
    Builtin(Vec<PatternRule>),
    /// External command template with `{file}` and `{rule}` placeholders.
    Command { template: String },
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        AnalyzerConfig::Builtin(builtin_rules())
    }
}

/// Analysis failures. These mark the sample analysis-failed rather than
/// insecure.
#[derive(Debug, thiserror::Error)]
pub enum AnalyzerError {
    #[error("analyzer command failed with status {status}: {stderr}")]
    CommandFailed { status: i32, stderr: String },
    #[error("analyzer could not start: {0}")]
    Spawn(std::io::Error),
    #[error("analyzer output violates the adapter contract: {0}")]
    Contract(String),
    #[error("unknown builtin rule {0:?}")]
    UnknownRule(String),
}

/// A line-level pattern rule for the built-in analyzer: a line matches
/// when any of the patterns does.
#[derive(Debug, Clone)]
pub struct PatternRule {
    pub id: String,
    pub message: String,
    patterns: Vec<Regex>,
}

impl PatternRule {
    pub fn new(id: &str, message: &str, patterns: &[&str]) -> Self {
        PatternRule {
            id: id.to_string(),
            message: message.to_string(),
            patterns: patterns
                .iter()
                .map(|p| Regex::new(p).expect("builtin patterns compile"))
                .collect(),
        }
    }

    fn matches(&self, line: &str) -> bool {
        self.patterns.iter().any(|p| p.is_match(line))
    }
}

/// The bundled rule set. Deliberately lightweight: these catch the
/// obviously dangerous shapes, they are not a CodeQL replacement.
pub fn builtin_rules() -> Vec<PatternRule> {
    vec![
        PatternRule::new(
            "py/shell-injection-lite",
            "shell command built from interpolated data",
            &[
                r#"os\.system\(\s*f["']"#,
                r#"os\.system\(\s*["'][^"']*["']\s*[+%]"#,
                r#"os\.system\(\s*[A-Za-z_]\w*\s*[),]"#,
                r#"subprocess\.(run|call|Popen|check_output)\(\s*f["'][^"']*\{"#,
                r#"subprocess\.(run|call|Popen|check_output)\([^)]*shell\s*=\s*True"#,
            ],
        ),
        PatternRule::new(
            "py/tar-extractall-lite",
            "tar archive extracted without per-member path checks",
            &[r"\.extractall\("],
        ),
        PatternRule::new(
            "py/unsafe-yaml-load-lite",
            "yaml.load without a safe loader",
            &[r"yaml\.load\((?:[^)]*)?\)"],
        ),
        PatternRule::new(
            "py/dynamic-eval-lite",
            "dynamic code execution on data",
            &[r"\beval\(", r"\bexec\("],
        ),
    ]
}

/// Run the built-in analyzer for one rule id over code text.
pub fn analyze_builtin(
    rules: &[PatternRule],
    rule_id: &str,
    code: &str,
) -> Result<Vec<Finding>, AnalyzerError> {
    let rule = rules
        .iter()
        .find(|r| r.id == rule_id)
        .ok_or_else(|| AnalyzerError::UnknownRule(rule_id.to_string()))?;
    let mut findings = Vec::new();
    for (i, line) in code.lines().enumerate() {
        if rule.matches(line) {
            findings.push(Finding {
                rule_id: rule.id.clone(),
                message: rule.message.clone(),
                line: (i + 1) as u32,
            });
        }
    }
    Ok(findings)
}

/// Run an external analyzer command and parse its findings.
pub fn analyze_command(
    template: &str,
    file: &Path,
    rule_id: &str,
) -> Result<Vec<Finding>, AnalyzerError> {
    let tokens: Vec<String> = template
        .split_whitespace()
        .map(|t| t.replace("{file}", &file.display().to_string()).replace("{rule}", rule_id))
        .collect();
    let (program, args) = tokens
        .split_first()
        .ok_or_else(|| AnalyzerError::Contract("empty command template".into()))?;

    let output = Command::new(program).args(args).output().map_err(AnalyzerError::Spawn)?;
    if !output.status.success() {
        return Err(AnalyzerError::CommandFailed {
            status: output.status.code().unwrap_or(-1),
            stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        });
    }
    let stdout = String::from_utf8(output.stdout)
        .map_err(|_| AnalyzerError::Contract("stdout is not UTF-8".into()))?;
    serde_json::from_str::<Vec<Finding>>(&stdout)
        .map_err(|e| AnalyzerError::Contract(format!("stdout is not a findings array: {e}")))
}

/// Analyze code under the configured adapter. For the command adapter
/// the code is materialized as `code_filename` in a scratch directory
/// that is removed afterwards; the built-in adapter reads the text
/// directly.
pub fn analyze_security(
    config: &AnalyzerConfig,
    code: &str,
    code_filename: &str,
    rule_id: &str,
) -> Result<Vec<Finding>, AnalyzerError> {
    match config {
        AnalyzerConfig::Builtin(rules) => analyze_builtin(rules, rule_id, code),
        AnalyzerConfig::Command { template } => {
            let scratch = tempfile::tempdir().map_err(AnalyzerError::Spawn)?;
            let file = scratch.path().join(code_filename);
            std::fs::write(&file, code).map_err(AnalyzerError::Spawn)?;
            analyze_command(template, &file, rule_id)
        }
    }
}
