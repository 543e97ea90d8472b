//! Request identity: which pipeline step is calling, for what scenario
//! and node. Replay transcripts key on this.

use serde::{Deserialize, Serialize};

use crate::graph::NodeId;

/// The pipeline step issuing a provider call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    /// Initial unconstrained solution.
    Seed,
    /// Relevance score for one practice node.
    Assess,
    /// Apply one practice node to the current code.
    Apply,
    /// Final functional-correctness pass.
    Revise,
    /// Graph builder: pairwise relation classification.
    Classify,
    /// Graph builder: practice normalization.
    Normalize,
}

impl std::fmt::Display for Step {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Step::Seed => "seed",
            Step::Assess => "assess",
            Step::Apply => "apply",
            Step::Revise => "revise",
            Step::Classify => "classify",
            Step::Normalize => "normalize",
        };
        write!(f, "{s}")
    }
}

/// Identity of one provider call. `node_id` is present exactly for the
/// per-node steps (`Assess`, `Apply`); the constructors make any other
/// combination unrepresentable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RequestContext {
    pub scenario_id: String,
    pub step: Step,
    pub node_id: Option<NodeId>,
    pub attempt: u8,
}

impl RequestContext {
    pub fn seed(scenario_id: impl Into<String>) -> Self {
        Self { scenario_id: scenario_id.into(), step: Step::Seed, node_id: None, attempt: 0 }
    }

    pub fn assess(scenario_id: impl Into<String>, node: NodeId) -> Self {
        Self {
            scenario_id: scenario_id.into(),
            step: Step::Assess,
            node_id: Some(node),
            attempt: 0,
        }
    }

    pub fn apply(scenario_id: impl Into<String>, node: NodeId) -> Self {
        Self { scenario_id: scenario_id.into(), step: Step::Apply, node_id: Some(node), attempt: 0 }
    }

    pub fn revise(scenario_id: impl Into<String>) -> Self {
        Self { scenario_id: scenario_id.into(), step: Step::Revise, node_id: None, attempt: 0 }
    }

    pub fn classify(pair_key: impl Into<String>) -> Self {
        Self { scenario_id: pair_key.into(), step: Step::Classify, node_id: None, attempt: 0 }
    }

    pub fn normalize(source_id: impl Into<String>) -> Self {
        Self { scenario_id: source_id.into(), step: Step::Normalize, node_id: None, attempt: 0 }
    }

    /// Same call identity, next attempt. Used for transport retries and
    /// the one semantic re-ask on unparseable relevance replies.
    pub fn next_attempt(&self) -> Self {
        let mut next = self.clone();
        next.attempt = next.attempt.saturating_add(1);
        next
    }

    /// Stable display key, used in error messages and replay-miss reports.
    pub fn key(&self) -> String {
        match self.node_id {
            Some(node) => {
                format!("{}/{}/node{}/a{}", self.scenario_id, self.step, node, self.attempt)
            }
            None => format!("{}/{}/a{}", self.scenario_id, self.step, self.attempt),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_id_present_exactly_for_per_node_steps() {
        assert!(RequestContext::seed("s").node_id.is_none());
        assert!(RequestContext::revise("s").node_id.is_none());
        assert!(RequestContext::classify("a|b").node_id.is_none());
        assert!(RequestContext::normalize("p0").node_id.is_none());
        assert!(RequestContext::assess("s", NodeId(3)).node_id.is_some());
        assert!(RequestContext::apply("s", NodeId(3)).node_id.is_some());
    }

    #[test]
    fn attempt_bump_preserves_identity() {
        let ctx = RequestContext::assess("s", NodeId(1));
        let next = ctx.next_attempt();
        assert_eq!(next.scenario_id, ctx.scenario_id);
        assert_eq!(next.step, ctx.step);
        assert_eq!(next.node_id, ctx.node_id);
        assert_eq!(next.attempt, 1);
        assert_eq!(next.key(), "s/assess/node1/a1");
    }
}
