//! The gated graph traversal.
//!
//! Nodes are visited in the canonical topological order (parents first,
//! ascending id on ties), which guarantees every parent's verdict is
//! known when a node is reached and that every node is visited exactly
//! once. At each node the gate asks: is this the root, or is at least one
//! parent relevant? If yes, the model scores the practice, and a score at
//! or above the threshold applies it; otherwise the node is marked
//! visited without any model call. A final revise pass then restores
//! functionality the security edits may have broken.

use super::trace::{Gate, Snapshots, TraceEntry, TraversalTrace};
use crate::eval::Scenario;
use crate::graph::{NodeId, ScpGraph};
use crate::provider::ops::{apply_practice, assess_relevance, generate_initial, revise_code};
use crate::provider::{PromptSet, Provider, ProviderError, Usage};

/// Relevance threshold, 1..=5. A practice is applied when its score is
/// greater than or equal to the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tau(u8);

impl Tau {
    pub const DEFAULT: Tau = Tau(3);

    pub fn new(value: u8) -> Result<Self, TraversalError> {
        if (1..=5).contains(&value) {
            Ok(Tau(value))
        } else {
            Err(TraversalError::InvalidTau(value))
        }
    }

    pub fn get(&self) -> u8 {
        self.0
    }
}

/// A completed traversal: final code, the audit trace, snapshots, and
/// total token usage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Traversal {
    pub final_code: String,
    pub trace: TraversalTrace,
    pub snapshots: Snapshots,
    pub usage: Usage,
}

/// Traversal failures. A provider failure aborts the run but hands back
/// the partial trace so it can be persisted for diagnosis.
#[derive(Debug, thiserror::Error)]
pub enum TraversalError {
    #[error("relevance threshold must be in 1..=5, got {0}")]
    InvalidTau(u8),
    #[error("graph failed validation: {report}")]
    InvalidGraph { report: String },
    #[error("traversal aborted at {stage}: {source}")]
    Aborted {
        stage: String,
        #[source]
        source: ProviderError,
        partial: Box<Traversal>,
    },
}

fn ensure_valid(graph: &ScpGraph) -> Result<Vec<NodeId>, TraversalError> {
    let report = graph.validate();
    if !report.is_valid() {
        return Err(TraversalError::InvalidGraph { report: report.to_string() });
    }
    graph.topological_order().map_err(|e| TraversalError::InvalidGraph { report: e.to_string() })
}

macro_rules! try_or_abort {
    ($expr:expr, $stage:expr, $code:expr, $trace:expr, $snapshots:expr, $usage:expr) => {
        match $expr {
            Ok(value) => value,
            Err(source) => {
                return Err(TraversalError::Aborted {
                    stage: $stage,
                    source,
                    partial: Box::new(Traversal {
                        final_code: $code,
                        trace: $trace,
                        snapshots: $snapshots,
                        usage: $usage,
                    }),
                })
            }
        }
    };
}

/// Run the full gated traversal for one scenario.
pub fn grasp_traverse(
    scenario: &Scenario,
    graph: &ScpGraph,
    provider: &dyn Provider,
    prompts: &PromptSet,
    tau: Tau,
) -> Result<Traversal, TraversalError> {
    traverse_inner(scenario, graph, provider, prompts, Some(tau))
}

/// Ablation: the relevance gate forced open. Every node is applied in
/// topological order with no scoring calls at all.
pub fn full_traversal(
    scenario: &Scenario,
    graph: &ScpGraph,
    provider: &dyn Provider,
    prompts: &PromptSet,
) -> Result<Traversal, TraversalError> {
    traverse_inner(scenario, graph, provider, prompts, None)
}

fn traverse_inner(
    scenario: &Scenario,
    graph: &ScpGraph,
    provider: &dyn Provider,
    prompts: &PromptSet,
    tau: Option<Tau>,
) -> Result<Traversal, TraversalError> {
    let order = ensure_valid(graph)?;

    let mut trace = TraversalTrace::new();
    let mut snapshots = Snapshots::default();
    let mut usage = Usage::ZERO;

    let seed = match generate_initial(provider, prompts, scenario) {
        Ok((code, seed_usage)) => {
            usage += seed_usage;
            code
        }
        Err(source) => {
            return Err(TraversalError::Aborted {
                stage: "seed".into(),
                source,
                partial: Box::new(Traversal { final_code: String::new(), trace, snapshots, usage }),
            })
        }
    };
    let mut code = seed.clone();
    let mut code_ref = snapshots.push(seed);
    trace.iteration_count += 1;

    for node_id in order {
        let node = graph.node(node_id).expect("order comes from the graph");
        let is_root = node_id == graph.root();
        let gated_open =
            is_root || graph.parents(node_id).iter().any(|p| trace.relevant.contains(p));

        if !gated_open {
            trace.visited.insert(node_id);
            trace.entries.push(TraceEntry {
                node_id,
                gate: Gate::SkippedNoRelevantParent,
                score: None,
                applied: false,
                apply_noop: false,
                code_ref,
            });
            continue;
        }

        // One refinement step per node that reaches the model, whether or
        // not the practice ends up applied.
        trace.iteration_count += 1;

        let (score, apply_now) = match tau {
            Some(tau) => {
                let assessment = try_or_abort!(
                    assess_relevance(provider, prompts, node, &code, scenario),
                    format!("assess node {node_id}"),
                    code.clone(),
                    trace,
                    snapshots,
                    usage
                );
                usage += assessment.usage;
                (Some(assessment.score), assessment.score >= tau.get())
            }
            // Forced-open gate: no scoring, apply unconditionally.
            None => (None, true),
        };

        let mut apply_noop = false;
        if apply_now {
            let applied = try_or_abort!(
                apply_practice(provider, prompts, node, &code, scenario),
                format!("apply node {node_id}"),
                code.clone(),
                trace,
                snapshots,
                usage
            );
            usage += applied.usage;
            apply_noop = applied.noop;
            // A no-op apply keeps the code but still marks the node
            // relevant: child gating reflects the relevance judgment,
            // not whether the model produced a diff this time.
            if !applied.noop {
                code = applied.code;
                code_ref = snapshots.push(code.clone());
            }
            trace.relevant.insert(node_id);
        }

        trace.visited.insert(node_id);
        trace.entries.push(TraceEntry {
            node_id,
            gate: Gate::Evaluated,
            score,
            applied: apply_now,
            apply_noop,
            code_ref,
        });
    }

    let (final_code, revise_usage) = try_or_abort!(
        revise_code(provider, prompts, &code, scenario),
        "revise".into(),
        code.clone(),
        trace,
        snapshots,
        usage
    );
    usage += revise_usage;
    trace.iteration_count += 1;
    snapshots.push(final_code.clone());

    Ok(Traversal { final_code, trace, snapshots, usage })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::scenario::test_scenario;
    use crate::graph::{EdgeKind, ScpEdge, ScpNode};
    use crate::provider::ScriptedProvider;

    fn chain_graph() -> ScpGraph {
        // 0 -> 1 -> 2
        ScpGraph::new(
            vec![ScpNode::new(0, "root"), ScpNode::new(1, "mid"), ScpNode::new(2, "leaf")],
            vec![
                ScpEdge::new(0, 1, EdgeKind::Specificity),
                ScpEdge::new(1, 2, EdgeKind::Sequential),
            ],
            NodeId(0),
        )
        .unwrap()
    }

    #[test]
    fn irrelevant_root_gates_everything() {
        let graph = chain_graph();
        let provider = ScriptedProvider::new(5).with_score(NodeId(0), 1);
        let scenario = test_scenario("s");
        let result =
            grasp_traverse(&scenario, &graph, &provider, &PromptSet::bundled(), Tau::DEFAULT)
                .unwrap();
        assert!(result.trace.relevant.is_empty());
        assert_eq!(result.trace.evaluated().count(), 1);
        assert_eq!(result.trace.visited.len(), 3, "all nodes still visited");
        // Seed + root + revise.
        assert_eq!(result.trace.iteration_count, 3);
        // Revise still ran: final snapshot exists beyond the seed.
        assert_eq!(result.snapshots.len(), 2);
    }

    #[test]
    fn tau_gate_applies_at_threshold() {
        let graph = chain_graph();
        // Score exactly tau must apply (>=, not >).
        let provider = ScriptedProvider::new(3);
        let scenario = test_scenario("s");
        let result =
            grasp_traverse(&scenario, &graph, &provider, &PromptSet::bundled(), Tau::DEFAULT)
                .unwrap();
        assert_eq!(result.trace.relevant.len(), 3);
        assert_eq!(result.trace.iteration_count, 5);
    }

    #[test]
    fn invalid_tau_is_rejected() {
        assert!(Tau::new(0).is_err());
        assert!(Tau::new(6).is_err());
        assert!(Tau::new(1).is_ok());
        assert!(Tau::new(5).is_ok());
    }

    #[test]
    fn cyclic_graph_is_a_precondition_error() {
        let graph = ScpGraph::new(
            vec![ScpNode::new(0, "r"), ScpNode::new(1, "a"), ScpNode::new(2, "b")],
            vec![
                ScpEdge::new(0, 1, EdgeKind::Specificity),
                ScpEdge::new(1, 2, EdgeKind::Specificity),
                ScpEdge::new(2, 1, EdgeKind::Specificity),
            ],
            NodeId(0),
        )
        .unwrap();
        let provider = ScriptedProvider::new(5);
        let scenario = test_scenario("s");
        let err = grasp_traverse(&scenario, &graph, &provider, &PromptSet::bundled(), Tau::DEFAULT)
            .unwrap_err();
        assert!(matches!(err, TraversalError::InvalidGraph { .. }));
    }

    #[test]
    fn provider_failure_keeps_the_partial_trace() {
        use crate::graph::NodeId;
        use crate::provider::{Reply, RequestContext, Step};
        struct FailOnLastApply;
        impl Provider for FailOnLastApply {
            fn complete(&self, ctx: &RequestContext, _: &str) -> Result<Reply, ProviderError> {
                match ctx.step {
                    Step::Apply if ctx.node_id == Some(NodeId(2)) => {
                        Err(ProviderError::Transport("down".into()))
                    }
                    Step::Assess => Ok(Reply { text: "5".into(), usage: Usage::one_call(1, 1) }),
                    _ => Ok(Reply { text: "```\ncode\n```".into(), usage: Usage::one_call(1, 1) }),
                }
            }
            fn deterministic(&self) -> bool {
                true
            }
        }
        let graph = chain_graph();
        let scenario = test_scenario("s");
        let err = grasp_traverse(
            &scenario,
            &graph,
            &FailOnLastApply,
            &PromptSet::bundled(),
            Tau::DEFAULT,
        )
        .unwrap_err();
        match err {
            TraversalError::Aborted { stage, partial, .. } => {
                assert_eq!(stage, "apply node 2");
                // Everything before the failure survives for diagnosis.
                assert_eq!(partial.trace.entries.len(), 2);
                assert!(partial.trace.relevant.contains(&NodeId(0)));
                assert!(partial.trace.relevant.contains(&NodeId(1)));
                assert_eq!(partial.snapshots.len(), 3, "seed plus two applies");
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn forced_open_traversal_applies_everything_without_scores() {
        let graph = chain_graph();
        let provider = ScriptedProvider::new(1); // scores would gate everything
        let scenario = test_scenario("s");
        let result = full_traversal(&scenario, &graph, &provider, &PromptSet::bundled()).unwrap();
        assert_eq!(result.trace.applied().count(), 3);
        assert!(result.trace.entries.iter().all(|e| e.score.is_none()));
        assert_eq!(result.trace.iteration_count, 5);
        assert_eq!(result.usage.calls, 5, "seed + 3 applies + revise, no assess calls");
    }

    #[test]
    fn noop_apply_still_marks_relevant() {
        use crate::provider::{Reply, RequestContext, Step};
        struct NoopApply;
        impl Provider for NoopApply {
            fn complete(&self, ctx: &RequestContext, _: &str) -> Result<Reply, ProviderError> {
                let text = match ctx.step {
                    Step::Seed => "```\nseed\n```".to_string(),
                    Step::Assess => "5".to_string(),
                    Step::Apply => "no code here, only advice".to_string(),
                    _ => "```\nfinal\n```".to_string(),
                };
                Ok(Reply { text, usage: Usage::one_call(1, 1) })
            }
            fn deterministic(&self) -> bool {
                true
            }
        }
        let graph = chain_graph();
        let scenario = test_scenario("s");
        let result =
            grasp_traverse(&scenario, &graph, &NoopApply, &PromptSet::bundled(), Tau::DEFAULT)
                .unwrap();
        // All three nodes relevant despite no-op applies; children were
        // still evaluated because their parents stayed relevant.
        assert_eq!(result.trace.relevant.len(), 3);
        assert!(result.trace.entries.iter().all(|e| e.apply_noop));
        // Only seed + final snapshots exist: no apply produced code.
        assert_eq!(result.snapshots.len(), 2);
    }
}
