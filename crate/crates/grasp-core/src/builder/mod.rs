//! Model-assisted graph construction from a flat practice checklist.
//!
//! The pipeline has four stages: normalize each practice into a single
//! imperative sentence, classify every pair of included practices for a
//! sequential or specificity dependency, assemble the edges into a graph
//! and repair it (cycle removal, transitive reduction, root attachment),
//! and export a plain-text review document for expert sign-off.
//!
//! Inclusion is an operator decision recorded in data: an exclusion
//! filter marks practices that are out of scope (for example,
//! architecture-level guidance that cannot apply at the code level), and
//! the records keep the reason.

mod assemble;
mod review;

pub use assemble::{
    assemble_and_repair, AssembledGraph, EdgeProvenance, RepairAction, RepairEvent, RepairLog,
};
pub use review::{export_review, import_review, ReviewParseError};

use serde::{Deserialize, Serialize};

use crate::provider::{complete_with_retry, PromptSet, Provider, ProviderError, RequestContext};

/// One practice as it moves through normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PracticeRecord {
    pub source_id: String,
    pub text: String,
    pub normalized_text: String,
    pub included: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion_reason: Option<String>,
}

/// Relation between an ordered pair of practices (a, b), a < b by
/// source id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairRelation {
    /// a must be applied before b.
    SequentialAb,
    /// b must be applied before a.
    SequentialBa,
    /// a is general; b is a specific realization of a.
    SpecificityAb,
    /// b is general; a is a specific realization of b.
    SpecificityBa,
    None,
}

/// One classified pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairClassification {
    pub a: String,
    pub b: String,
    pub relation: PairRelation,
    /// Model-reported confidence in [0, 1].
    pub confidence: f64,
}

/// Builder failures. Provider errors carry the work finished so far so
/// long runs can be resumed from a partial output file.
#[derive(Debug, thiserror::Error)]
pub enum BuilderError {
    #[error("no practices to normalize")]
    EmptyInput,
    #[error("need at least two included practices, have {0}")]
    TooFewIncluded(usize),
    #[error("designated root {0:?} is not among the included practices")]
    MissingRoot(String),
    #[error("provider failed at {stage} after {completed} items: {source}")]
    Aborted {
        stage: &'static str,
        completed: usize,
        #[source]
        source: ProviderError,
        partial_json: String,
    },
}

/// Substring-based exclusion rules: a practice whose original text
/// contains the pattern is excluded with the attached reason.
#[derive(Debug, Clone, Default)]
pub struct ExclusionFilter {
    rules: Vec<(String, String)>,
}

impl ExclusionFilter {
    pub fn new(rules: Vec<(String, String)>) -> Self {
        ExclusionFilter { rules }
    }

    /// Parse filter lines: `pattern<TAB>reason`, `#` comments allowed.
    pub fn parse(text: &str) -> Self {
        let rules = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .filter_map(|l| {
                l.split_once('\t').map(|(p, r)| (p.trim().to_string(), r.trim().to_string()))
            })
            .collect();
        ExclusionFilter { rules }
    }

    pub fn reason_for(&self, text: &str) -> Option<&str> {
        self.rules
            .iter()
            .find(|(pattern, _)| text.contains(pattern.as_str()))
            .map(|(_, reason)| reason.as_str())
    }
}

/// Read a practice checklist: one practice per line, `#` comments and
/// blank lines skipped. Source ids are `p000`, `p001`, … in file order.
pub fn read_practices(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(i, line)| (format!("p{i:03}"), line.to_string()))
        .collect()
}

/// Normalize raw practices via the model, one call per practice, and
/// apply the exclusion filter. On provider failure the finished records
/// are attached to the error as JSON for resume.
pub fn normalize_practices(
    raw: &[(String, String)],
    provider: &dyn Provider,
    prompts: &PromptSet,
    filter: &ExclusionFilter,
) -> Result<Vec<PracticeRecord>, BuilderError> {
    if raw.is_empty() {
        return Err(BuilderError::EmptyInput);
    }
    let mut records = Vec::with_capacity(raw.len());
    for (source_id, text) in raw {
        let prompt = prompts
            .render("normalize", &[("scp_text", text)])
            .map_err(|e| abort("normalize", &records, ProviderError::Config(e.to_string())))?;
        let ctx = RequestContext::normalize(source_id.clone());
        let reply = complete_with_retry(provider, &ctx, &prompt)
            .map_err(|e| abort("normalize", &records, e))?;
        // One sentence per reply: take the first non-empty line.
        let normalized =
            reply.text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or(text).to_string();
        let exclusion_reason = filter.reason_for(text).map(str::to_string);
        records.push(PracticeRecord {
            source_id: source_id.clone(),
            text: text.clone(),
            normalized_text: normalized,
            included: exclusion_reason.is_none(),
            exclusion_reason,
        });
    }
    Ok(records)
}

/// Classify every unordered pair of included practices, enumerated in
/// lexicographic source-id order. Exactly C(n, 2) provider calls.
pub fn classify_pairs(
    records: &[PracticeRecord],
    provider: &dyn Provider,
    prompts: &PromptSet,
) -> Result<Vec<PairClassification>, BuilderError> {
    let mut included: Vec<&PracticeRecord> = records.iter().filter(|r| r.included).collect();
    included.sort_by(|x, y| x.source_id.cmp(&y.source_id));
    if included.len() < 2 {
        return Err(BuilderError::TooFewIncluded(included.len()));
    }

    let mut classifications = Vec::new();
    for i in 0..included.len() {
        for j in (i + 1)..included.len() {
            let (a, b) = (included[i], included[j]);
            let pair_text = format!(
                "A ({}): {}\nB ({}): {}",
                a.source_id, a.normalized_text, b.source_id, b.normalized_text
            );
            let prompt = prompts.render("classify", &[("scp_text", &pair_text)]).map_err(|e| {
                abort("classify", &classifications, ProviderError::Config(e.to_string()))
            })?;
            let ctx = RequestContext::classify(format!("{}|{}", a.source_id, b.source_id));
            let reply = complete_with_retry(provider, &ctx, &prompt)
                .map_err(|e| abort("classify", &classifications, e))?;
            let (relation, confidence) = parse_classification(&reply.text);
            classifications.push(PairClassification {
                a: a.source_id.clone(),
                b: b.source_id.clone(),
                relation,
                confidence,
            });
        }
    }
    Ok(classifications)
}

fn abort<T: Serialize>(stage: &'static str, done: &[T], source: ProviderError) -> BuilderError {
    BuilderError::Aborted {
        stage,
        completed: done.len(),
        source,
        partial_json: serde_json::to_string_pretty(done).unwrap_or_else(|_| "[]".into()),
    }
}

/// Parse a classification reply: a relation label plus an optional
/// confidence. Unparseable replies become `None` with confidence 0; a
/// parsed label without a number defaults to confidence 0.5.
pub fn parse_classification(reply: &str) -> (PairRelation, f64) {
    let lower = reply.to_ascii_lowercase();
    let relation = [
        ("sequential_ab", PairRelation::SequentialAb),
        ("sequential_ba", PairRelation::SequentialBa),
        ("specificity_ab", PairRelation::SpecificityAb),
        ("specificity_ba", PairRelation::SpecificityBa),
        ("none", PairRelation::None),
    ]
    .into_iter()
    .filter_map(|(label, rel)| lower.find(label).map(|pos| (pos, rel)))
    .min_by_key(|(pos, _)| *pos)
    .map(|(_, rel)| rel);

    let Some(relation) = relation else {
        return (PairRelation::None, 0.0);
    };

    let confidence = first_float(&lower).map_or(0.5, |c| c.clamp(0.0, 1.0));
    (relation, confidence)
}

fn first_float(text: &str) -> Option<f64> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit()
            || (bytes[i] == b'.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit())
        {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if let Ok(v) = text[start..i].parse::<f64>() {
                return Some(v);
            }
        } else {
            i += 1;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::{Reply, ScriptedProvider, Usage};

    #[test]
    fn practice_file_parsing_skips_comments() {
        let text = "# checklist\nValidate input\n\nEncode output\n";
        let raw = read_practices(text);
        assert_eq!(raw.len(), 2);
        assert_eq!(raw[0], ("p000".to_string(), "Validate input".to_string()));
        assert_eq!(raw[1].0, "p001");
    }

    #[test]
    fn architecture_level_practices_are_excluded_with_reason() {
        let raw = vec![
            ("p000".to_string(), "Validate input".to_string()),
            (
                "p001".to_string(),
                "Isolate development environments from the production network".to_string(),
            ),
        ];
        let filter =
            ExclusionFilter::parse("Isolate development environments\tarchitecture-level\n");
        let provider = ScriptedProvider::new(3)
            .with_text_reply("p000", "Validate all input.")
            .with_text_reply("p001", "Isolate development environments.");
        let records = normalize_practices(&raw, &provider, &PromptSet::bundled(), &filter).unwrap();
        assert!(records[0].included);
        assert!(!records[1].included);
        assert_eq!(records[1].exclusion_reason.as_deref(), Some("architecture-level"));
    }

    #[test]
    fn empty_input_is_a_precondition_error() {
        let provider = ScriptedProvider::new(3);
        let err =
            normalize_practices(&[], &provider, &PromptSet::bundled(), &ExclusionFilter::default())
                .unwrap_err();
        assert!(matches!(err, BuilderError::EmptyInput));
    }

    #[test]
    fn normalization_replays_fixture_text_verbatim() {
        let raw = vec![
            ("p000".to_string(), "validate ALL the input".to_string()),
            ("p001".to_string(), "please encode output".to_string()),
            ("p002".to_string(), "handle errors".to_string()),
        ];
        let provider = ScriptedProvider::new(3)
            .with_text_reply("p000", "Validate all input.")
            .with_text_reply("p001", "Encode all output.")
            .with_text_reply("p002", "Handle errors comprehensively.");
        let records = normalize_practices(
            &raw,
            &provider,
            &PromptSet::bundled(),
            &ExclusionFilter::default(),
        )
        .unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].normalized_text, "Validate all input.");
        assert_eq!(records[2].normalized_text, "Handle errors comprehensively.");
    }

    #[test]
    fn three_included_records_make_three_pairs() {
        let records: Vec<PracticeRecord> = (0..3)
            .map(|i| PracticeRecord {
                source_id: format!("p{i:03}"),
                text: format!("practice {i}"),
                normalized_text: format!("Practice {i}."),
                included: true,
                exclusion_reason: None,
            })
            .collect();
        let provider = ScriptedProvider::new(3)
            .with_text_reply("p000|p001", "specificity_ab 0.9")
            .with_text_reply("p000|p002", "none 0.2")
            .with_text_reply("p001|p002", "sequential_ab 0.8");
        let classifications = classify_pairs(&records, &provider, &PromptSet::bundled()).unwrap();
        assert_eq!(classifications.len(), 3);
        assert_eq!(classifications[0].relation, PairRelation::SpecificityAb);
        assert_eq!(classifications[2].relation, PairRelation::SequentialAb);
    }

    #[test]
    fn classify_pairs_issues_exactly_choose_two_calls() {
        use crate::provider::RequestContext;
        use std::sync::atomic::{AtomicUsize, Ordering};

        struct Counting(AtomicUsize);
        impl Provider for Counting {
            fn complete(&self, _: &RequestContext, _: &str) -> Result<Reply, ProviderError> {
                self.0.fetch_add(1, Ordering::SeqCst);
                Ok(Reply { text: "none 0.0".into(), usage: Usage::one_call(1, 1) })
            }
            fn deterministic(&self) -> bool {
                true
            }
        }

        let records: Vec<PracticeRecord> = (0..6)
            .map(|i| PracticeRecord {
                source_id: format!("p{i:03}"),
                text: format!("practice {i}"),
                normalized_text: format!("Practice {i}."),
                included: true,
                exclusion_reason: None,
            })
            .collect();
        let provider = Counting(AtomicUsize::new(0));
        classify_pairs(&records, &provider, &PromptSet::bundled()).unwrap();
        assert_eq!(provider.0.load(Ordering::SeqCst), 15, "C(6,2) calls");
    }

    #[test]
    fn classification_parsing_handles_noise() {
        assert_eq!(parse_classification("specificity_ab 0.9"), (PairRelation::SpecificityAb, 0.9));
        assert_eq!(
            parse_classification("I think the answer is sequential_ba, confidence 0.75"),
            (PairRelation::SequentialBa, 0.75)
        );
        assert_eq!(parse_classification("no dependency at all"), (PairRelation::None, 0.0));
        assert_eq!(parse_classification("none"), (PairRelation::None, 0.5));
        assert_eq!(parse_classification("specificity_ab 7"), (PairRelation::SpecificityAb, 1.0));
        assert_eq!(parse_classification(""), (PairRelation::None, 0.0));
    }

    #[test]
    fn provider_failure_carries_partial_results() {
        use crate::provider::RequestContext;
        use std::sync::atomic::{AtomicUsize, Ordering};

        struct FailAfter(AtomicUsize);
        impl Provider for FailAfter {
            fn complete(&self, _: &RequestContext, _: &str) -> Result<Reply, ProviderError> {
                if self.0.fetch_add(1, Ordering::SeqCst) >= 2 {
                    return Err(ProviderError::Transport("down".into()));
                }
                Ok(Reply { text: "Normalized.".into(), usage: Usage::one_call(1, 1) })
            }
            fn deterministic(&self) -> bool {
                true
            }
        }
        let raw: Vec<(String, String)> =
            (0..5).map(|i| (format!("p{i:03}"), format!("practice {i}"))).collect();
        let provider = FailAfter(AtomicUsize::new(0));
        let err = normalize_practices(
            &raw,
            &provider,
            &PromptSet::bundled(),
            &ExclusionFilter::default(),
        )
        .unwrap_err();
        match err {
            BuilderError::Aborted { stage, completed, partial_json, .. } => {
                assert_eq!(stage, "normalize");
                assert_eq!(completed, 2);
                let parsed: Vec<PracticeRecord> = serde_json::from_str(&partial_json).unwrap();
                assert_eq!(parsed.len(), 2);
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }
}
