//! The pipeline's model interactions, implemented once over the
//! [`Provider`] trait.

use super::context::RequestContext;
use super::extract::{extract_code, extract_last_fenced_block, parse_relevance_score};
use super::prompts::PromptSet;
use super::{complete_with_retry, Provider, ProviderError, Usage};
use crate::eval::Scenario;
use crate::graph::ScpNode;

/// Seed generation: a plain prompt, no security constraints. The reply's
/// last fenced block is the code; a fenceless reply is taken whole.
pub fn generate_initial(
    provider: &dyn Provider,
    prompts: &PromptSet,
    scenario: &Scenario,
) -> Result<(String, Usage), ProviderError> {
    if scenario.prompt.trim().is_empty() {
        return Err(ProviderError::InvalidRequest(format!(
            "scenario {} has an empty prompt",
            scenario.id
        )));
    }
    let prompt = prompts
        .render("seed", &[("scenario", &scenario.prompt)])
        .map_err(|e| ProviderError::Config(e.to_string()))?;
    let ctx = RequestContext::seed(&scenario.id);
    let reply = complete_with_retry(provider, &ctx, &prompt)?;
    if reply.text.trim().is_empty() {
        return Err(ProviderError::EmptyReply(ctx.key()));
    }
    Ok((extract_code(&reply.text), reply.usage))
}

/// Relevance assessment for one practice node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assessment {
    /// Always in 1..=5.
    pub score: u8,
    pub usage: Usage,
    /// Set when the model never produced a number and the score fell back
    /// to 1 (fail-irrelevant).
    pub defaulted: bool,
}

/// Score a practice against the current code: an integer 1..=5, clamped.
/// A non-numeric reply is re-asked once, then defaults to 1.
pub fn assess_relevance(
    provider: &dyn Provider,
    prompts: &PromptSet,
    node: &ScpNode,
    code: &str,
    scenario: &Scenario,
) -> Result<Assessment, ProviderError> {
    if code.trim().is_empty() {
        return Err(ProviderError::InvalidRequest("cannot assess empty code".into()));
    }
    let prompt = prompts
        .render(
            "assess",
            &[("scenario", &scenario.prompt), ("code", code), ("scp_text", &node.text)],
        )
        .map_err(|e| ProviderError::Config(e.to_string()))?;

    let mut ctx = RequestContext::assess(&scenario.id, node.id);
    let mut usage = Usage::ZERO;
    for round in 0..2 {
        let reply = complete_with_retry(provider, &ctx, &prompt)?;
        usage += reply.usage;
        if let Some(score) = parse_relevance_score(&reply.text) {
            return Ok(Assessment { score, usage, defaulted: false });
        }
        if round == 0 {
            ctx = ctx.next_attempt();
        }
    }
    Ok(Assessment { score: 1, usage, defaulted: true })
}

/// Result of applying one practice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Applied {
    pub code: String,
    pub usage: Usage,
    /// The model returned no code block; the previous code was kept.
    pub noop: bool,
}

/// Ask the model to apply a practice to the current code. The reply's
/// last fenced block replaces the code; no block means no-op.
pub fn apply_practice(
    provider: &dyn Provider,
    prompts: &PromptSet,
    node: &ScpNode,
    code: &str,
    scenario: &Scenario,
) -> Result<Applied, ProviderError> {
    let prompt = prompts
        .render(
            "apply",
            &[("scenario", &scenario.prompt), ("code", code), ("scp_text", &node.text)],
        )
        .map_err(|e| ProviderError::Config(e.to_string()))?;
    let ctx = RequestContext::apply(&scenario.id, node.id);
    let reply = complete_with_retry(provider, &ctx, &prompt)?;
    match extract_last_fenced_block(&reply.text) {
        Some(new_code) => Ok(Applied { code: new_code, usage: reply.usage, noop: false }),
        None => Ok(Applied { code: code.to_string(), usage: reply.usage, noop: true }),
    }
}

/// Final pass: restore functionality per the original task while keeping
/// the security edits. A reply without a code block keeps the input code.
pub fn revise_code(
    provider: &dyn Provider,
    prompts: &PromptSet,
    code: &str,
    scenario: &Scenario,
) -> Result<(String, Usage), ProviderError> {
    if code.trim().is_empty() {
        return Err(ProviderError::InvalidRequest("cannot revise empty code".into()));
    }
    let prompt = prompts
        .render("revise", &[("scenario", &scenario.prompt), ("code", code)])
        .map_err(|e| ProviderError::Config(e.to_string()))?;
    let ctx = RequestContext::revise(&scenario.id);
    let reply = complete_with_retry(provider, &ctx, &prompt)?;
    match extract_last_fenced_block(&reply.text) {
        Some(new_code) => Ok((new_code, reply.usage)),
        None => Ok((code.to_string(), reply.usage)),
    }
}
