//! Prompt templates with named placeholders.
//!
//! Templates are plain text files using `{scenario}`, `{code}` and
//! `{scp_text}` placeholders. The set bundled with the crate is the
//! default; a template directory can override any of them file by file.

use std::collections::BTreeMap;
use std::path::Path;

/// Template names, also the file stems in a template directory.
pub const TEMPLATE_NAMES: [&str; 9] = [
    "seed",
    "zero_shot",
    "plan_and_solve",
    "flat_scp",
    "assess",
    "apply",
    "revise",
    "normalize",
    "classify",
];

/// Template loading problems.
#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("unknown template {0:?}")]
    Unknown(String),
    #[error("template {name}: {source}")]
    Io {
        name: String,
        #[source]
        source: std::io::Error,
    },
}

/// The full set of prompt templates used by the pipeline.
#[derive(Debug, Clone)]
pub struct PromptSet {
    templates: BTreeMap<String, String>,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self::bundled()
    }
}

impl PromptSet {
    /// The templates compiled into the crate.
    pub fn bundled() -> Self {
        let mut templates = BTreeMap::new();
        templates.insert("seed".into(), include_str!("../../templates/seed.txt").into());
        templates.insert("zero_shot".into(), include_str!("../../templates/zero_shot.txt").into());
        templates.insert(
            "plan_and_solve".into(),
            include_str!("../../templates/plan_and_solve.txt").into(),
        );
        templates.insert("flat_scp".into(), include_str!("../../templates/flat_scp.txt").into());
        templates.insert("assess".into(), include_str!("../../templates/assess.txt").into());
        templates.insert("apply".into(), include_str!("../../templates/apply.txt").into());
        templates.insert("revise".into(), include_str!("../../templates/revise.txt").into());
        templates.insert("normalize".into(), include_str!("../../templates/normalize.txt").into());
        templates.insert("classify".into(), include_str!("../../templates/classify.txt").into());
        PromptSet { templates }
    }

    /// Bundled templates with per-file overrides from `dir`. A file named
    /// `<template>.txt` replaces that template; everything else stays.
    pub fn with_overrides(dir: impl AsRef<Path>) -> Result<Self, TemplateError> {
        let mut set = Self::bundled();
        for name in TEMPLATE_NAMES {
            let path = dir.as_ref().join(format!("{name}.txt"));
            if path.exists() {
                let text = std::fs::read_to_string(&path)
                    .map_err(|source| TemplateError::Io { name: name.to_string(), source })?;
                set.templates.insert(name.to_string(), text);
            }
        }
        Ok(set)
    }

    pub fn raw(&self, name: &str) -> Result<&str, TemplateError> {
        self.templates
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| TemplateError::Unknown(name.to_string()))
    }

    /// Render a template, substituting `{scenario}`, `{code}` and
    /// `{scp_text}`. Placeholders without a binding are left verbatim.
    pub fn render(&self, name: &str, bindings: &[(&str, &str)]) -> Result<String, TemplateError> {
        let mut text = self.raw(name)?.to_string();
        for (key, value) in bindings {
            text = text.replace(&format!("{{{key}}}"), value);
        }
        Ok(text)
    }
}
