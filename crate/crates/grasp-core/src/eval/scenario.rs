//! Scenario definitions and the manifest file format.
//!
//! A manifest is a UTF-8 JSON array of scenario objects. Test assets are
//! referenced by path relative to the manifest file and copied into the
//! sandbox workspace when tests run.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

fn default_code_filename() -> String {
    "solution.py".to_string()
}

/// One coding task: what to ask for, how to check it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    /// Unique within a manifest.
    pub id: String,
    /// Target weakness class, e.g. "CWE-022".
    pub cwe: String,
    /// Language label, e.g. "python" or "c". Informational; the command
    /// templates below decide what actually runs.
    pub language_tag: String,
    /// The natural-language task. Specifies function signature, argument
    /// types, return values, and I/O behavior.
    pub prompt: String,
    /// Analyzer rule id that decides this scenario's security verdict.
    pub analyzer_rule: String,
    /// Command template for the validity check; `{file}` and `{dir}`
    /// placeholders refer to the materialized code file and workspace.
    pub validate_cmd: String,
    /// Command template for functional tests, same placeholders.
    pub test_cmd: String,
    /// Wall-clock budget in seconds for each command.
    pub timeout: u64,
    /// Filename the generated code is materialized as, so test assets can
    /// import it by module name.
    #[serde(default = "default_code_filename")]
    pub code_filename: String,
    /// Test asset files copied into the workspace, relative to the
    /// manifest.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assets: Vec<String>,
}

/// Manifest problems.
#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("manifest io: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest is not a JSON array of scenarios: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate scenario id {0:?}")]
    DuplicateId(String),
    #[error("scenario {id:?}: {message}")]
    Invalid { id: String, message: String },
}

impl Scenario {
    fn check(&self) -> Result<(), ScenarioError> {
        if self.prompt.trim().is_empty() {
            return Err(ScenarioError::Invalid {
                id: self.id.clone(),
                message: "prompt is empty".into(),
            });
        }
        if self.timeout == 0 {
            return Err(ScenarioError::Invalid {
                id: self.id.clone(),
                message: "timeout must be positive".into(),
            });
        }
        Ok(())
    }
}

/// A manifest plus the directory its relative asset paths resolve
/// against.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub scenarios: Vec<Scenario>,
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn asset_path(&self, relative: &str) -> PathBuf {
        self.base_dir.join(relative)
    }
}

/// Load and check a manifest file.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let scenarios: Vec<Scenario> = serde_json::from_str(&text)?;
    let mut seen = BTreeSet::new();
    for s in &scenarios {
        s.check()?;
        if !seen.insert(s.id.clone()) {
            return Err(ScenarioError::DuplicateId(s.id.clone()));
        }
    }
    let base_dir = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    Ok(Manifest { scenarios, base_dir })
}

#[cfg(test)]
pub(crate) fn test_scenario(id: &str) -> Scenario {
    Scenario {
        id: id.to_string(),
        cwe: "CWE-078".to_string(),
        language_tag: "python".to_string(),
        prompt: "Write a function named run that echoes its argument.".to_string(),
        analyzer_rule: "py/shell-injection-lite".to_string(),
        validate_cmd: "true".to_string(),
        test_cmd: "true".to_string(),
        timeout: 10,
        code_filename: default_code_filename(),
        assets: Vec::new(),
    }
}
