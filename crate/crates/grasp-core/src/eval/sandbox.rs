//! Isolated execution of validity checks and functional tests.
//!
//! Each sample gets a fresh temp workspace: the code file, plus the
//! scenario's test assets for test runs. Command templates are
//! whitespace-tokenized with `{file}` and `{dir}` substituted per token;
//! there is no shell in between, so samples cannot smuggle arguments.
//! Workspaces are removed when the check finishes, pass or fail.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

use super::scenario::Scenario;

/// Outcome of one sandboxed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommandOutcome {
    /// Exit status zero within the time budget.
    pub passed: bool,
    /// The command was killed at the timeout.
    pub timed_out: bool,
}

/// Sandbox failures that are about the environment, not the sample.
#[derive(Debug, thiserror::Error)]
pub enum SandboxError {
    #[error("command {program:?} not found on PATH")]
    MissingTool { program: String },
    #[error("sandbox io: {0}")]
    Io(#[from] std::io::Error),
    #[error("empty command template")]
    EmptyCommand,
}

/// Fresh workspace directory, named after the scenario so stray
/// leftovers are attributable.
fn workspace_for(scenario: &Scenario) -> std::io::Result<tempfile::TempDir> {
    let tag: String = scenario
        .id
        .chars()
        .filter(|c| c.is_ascii_alphanumeric() || *c == '-' || *c == '_')
        .collect();
    tempfile::Builder::new().prefix(&format!("grasp-sbx-{tag}-")).tempdir()
}

fn tokenize(template: &str, file: &Path, dir: &Path) -> Result<Vec<String>, SandboxError> {
    let tokens: Vec<String> = template
        .split_whitespace()
        .map(|t| {
            t.replace("{file}", &file.display().to_string())
                .replace("{dir}", &dir.display().to_string())
        })
        .collect();
    if tokens.is_empty() {
        return Err(SandboxError::EmptyCommand);
    }
    Ok(tokens)
}

fn run_in_workspace(
    template: &str,
    file: &Path,
    dir: &Path,
    timeout: Duration,
) -> Result<CommandOutcome, SandboxError> {
    let tokens = tokenize(template, file, dir)?;
    let (program, args) = tokens.split_first().expect("tokenize rejects empty");

    let spawned = Command::new(program)
        .args(args)
        .current_dir(dir)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn();
    let mut child = match spawned {
        Ok(child) => child,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(SandboxError::MissingTool { program: program.clone() })
        }
        Err(e) => return Err(e.into()),
    };

    match child.wait_timeout(timeout)? {
        Some(status) => Ok(CommandOutcome { passed: status.success(), timed_out: false }),
        None => {
            child.kill().ok();
            child.wait().ok();
            Ok(CommandOutcome { passed: false, timed_out: true })
        }
    }
}

/// Write the code into a fresh workspace and run the scenario's validity
/// command. Exit 0 means valid; a timeout means invalid; a missing tool
/// is an environment error, which is distinct from "invalid sample".
pub fn check_validity(code: &str, scenario: &Scenario) -> Result<CommandOutcome, SandboxError> {
    let workspace = workspace_for(scenario)?;
    let file = workspace.path().join(&scenario.code_filename);
    std::fs::write(&file, code)?;
    run_in_workspace(
        &scenario.validate_cmd,
        &file,
        workspace.path(),
        Duration::from_secs(scenario.timeout),
    )
}

/// Materialize code plus the scenario's test assets and run the test
/// command. Call only for valid samples; invalid code is functionally
/// incorrect by definition and must not reach this.
pub fn run_tests(
    code: &str,
    scenario: &Scenario,
    asset_base: &Path,
) -> Result<CommandOutcome, SandboxError> {
    let workspace = workspace_for(scenario)?;
    let file = workspace.path().join(&scenario.code_filename);
    std::fs::write(&file, code)?;
    for asset in &scenario.assets {
        let source = asset_base.join(asset);
        let target = workspace
            .path()
            .join(PathBuf::from(asset).file_name().ok_or(SandboxError::EmptyCommand)?);
        std::fs::copy(&source, &target)?;
    }
    run_in_workspace(
        &scenario.test_cmd,
        &file,
        workspace.path(),
        Duration::from_secs(scenario.timeout),
    )
}
