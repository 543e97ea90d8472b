//! A deterministic provider with canned behavior, for offline runs and
//! tests that do not want transcript files.

use std::collections::BTreeMap;

use super::{Provider, ProviderError, Reply, RequestContext, Step, Usage};
use crate::graph::NodeId;

/// Scripted replies: per-node relevance scores, a seed solution, and
/// marker code for apply/revise steps. Every reply is a pure function of
/// the request context.
#[derive(Debug, Clone)]
pub struct ScriptedProvider {
    scores: BTreeMap<NodeId, u8>,
    default_score: u8,
    seed_code: String,
    revise_suffix: String,
    tokens_per_call: (u64, u64),
    /// Replies for classify/normalize calls, keyed by the context's
    /// scenario id (pair key or source id).
    text_replies: BTreeMap<String, String>,
}

impl ScriptedProvider {
    pub fn new(default_score: u8) -> Self {
        ScriptedProvider {
            scores: BTreeMap::new(),
            default_score,
            seed_code: "def solution():\n    pass\n".to_string(),
            revise_suffix: "# revised\n".to_string(),
            tokens_per_call: (100, 40),
            text_replies: BTreeMap::new(),
        }
    }

    pub fn with_score(mut self, node: NodeId, score: u8) -> Self {
        self.scores.insert(node, score);
        self
    }

    pub fn with_scores(mut self, scores: impl IntoIterator<Item = (NodeId, u8)>) -> Self {
        self.scores.extend(scores);
        self
    }

    pub fn with_seed_code(mut self, code: impl Into<String>) -> Self {
        self.seed_code = code.into();
        self
    }

    pub fn with_tokens_per_call(mut self, input: u64, output: u64) -> Self {
        self.tokens_per_call = (input, output);
        self
    }

    pub fn with_text_reply(mut self, key: impl Into<String>, reply: impl Into<String>) -> Self {
        self.text_replies.insert(key.into(), reply.into());
        self
    }

    fn usage(&self) -> Usage {
        Usage::one_call(self.tokens_per_call.0, self.tokens_per_call.1)
    }
}

impl Provider for ScriptedProvider {
    fn complete(&self, ctx: &RequestContext, _prompt: &str) -> Result<Reply, ProviderError> {
        let text = match ctx.step {
            Step::Seed => format!("```\n{}```", ensure_newline(&self.seed_code)),
            Step::Assess => {
                let node = ctx.node_id.expect("assess carries a node id");
                self.scores.get(&node).copied().unwrap_or(self.default_score).to_string()
            }
            Step::Apply => {
                let node = ctx.node_id.expect("apply carries a node id");
                format!("```\n# practice {node} applied\n```")
            }
            Step::Revise => format!("```\n{}```", ensure_newline(&self.revise_suffix)),
            Step::Classify | Step::Normalize => self
                .text_replies
                .get(&ctx.scenario_id)
                .cloned()
                .unwrap_or_else(|| "none 0.0".to_string()),
        };
        Ok(Reply { text, usage: self.usage() })
    }

    fn deterministic(&self) -> bool {
        true
    }
}

fn ensure_newline(s: &str) -> String {
    if s.ends_with('\n') {
        s.to_string()
    } else {
        format!("{s}\n")
    }
}
