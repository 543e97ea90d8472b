//! Traversal properties: gate soundness, threshold monotonicity,
//! completeness, determinism, and the provider-call budget.

use std::collections::BTreeSet;

use proptest::prelude::*;

use grasp_core::engine::{grasp_traverse, Gate, Tau};
use grasp_core::eval::Scenario;
use grasp_core::graph::{parse_graph, EdgeKind, NodeId, ScpEdge, ScpGraph, ScpNode};
use grasp_core::provider::{PromptSet, ScriptedProvider};

fn scenario() -> Scenario {
    Scenario {
        id: "prop-scenario".into(),
        cwe: "CWE-000".into(),
        language_tag: "python".into(),
        prompt: "Write a function named f.".into(),
        analyzer_rule: "py/dynamic-eval-lite".into(),
        validate_cmd: "true".into(),
        test_cmd: "true".into(),
        timeout: 5,
        code_filename: "solution.py".into(),
        assets: vec![],
    }
}

/// Rooted DAG plus one scripted score per node.
fn arb_scored_dag() -> impl Strategy<Value = (u32, Vec<(u32, u32)>, Vec<u8>)> {
    (2u32..=9).prop_flat_map(|n| {
        let all_pairs: Vec<(u32, u32)> =
            (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        let len = all_pairs.len();
        (
            Just(n),
            proptest::collection::vec(any::<bool>(), len),
            proptest::collection::vec(1u8..=5, n as usize),
        )
            .prop_map(move |(n, mask, scores)| {
                let mut edges: Vec<(u32, u32)> = all_pairs
                    .iter()
                    .zip(&mask)
                    .filter(|(_, &keep)| keep)
                    .map(|(&e, _)| e)
                    .collect();
                for node in 1..n {
                    if !edges.iter().any(|&(_, to)| to == node) {
                        edges.push((node - 1, node));
                    }
                }
                edges.sort_unstable();
                edges.dedup();
                (n, edges, scores)
            })
    })
}

fn build(n: u32, edges: &[(u32, u32)]) -> ScpGraph {
    let nodes = (0..n).map(|i| ScpNode::new(i, format!("p{i}"))).collect();
    let edge_list = edges.iter().map(|&(a, b)| ScpEdge::new(a, b, EdgeKind::Specificity)).collect();
    ScpGraph::new(nodes, edge_list, NodeId(0)).unwrap()
}

fn provider_for(scores: &[u8]) -> ScriptedProvider {
    ScriptedProvider::new(1)
        .with_scores(scores.iter().enumerate().map(|(i, &s)| (NodeId(i as u32), s)))
}

proptest! {
    #[test]
    fn gate_soundness_holds_on_the_trace((n, edges, scores) in arb_scored_dag()) {
        let graph = build(n, &edges);
        let provider = provider_for(&scores);
        let result =
            grasp_traverse(&scenario(), &graph, &provider, &PromptSet::bundled(), Tau::DEFAULT)
                .unwrap();
        for entry in &result.trace.entries {
            let has_relevant_parent = graph
                .parents(entry.node_id)
                .iter()
                .any(|p| result.trace.relevant.contains(p));
            let expected = entry.node_id == graph.root() || has_relevant_parent;
            prop_assert_eq!(
                entry.gate == Gate::Evaluated,
                expected,
                "node {} gate disagrees with parents",
                entry.node_id
            );
            // Applied implies the score met the default threshold.
            if entry.applied {
                prop_assert!(entry.score.unwrap() >= Tau::DEFAULT.get());
            }
        }
    }

    #[test]
    fn relevant_sets_are_nested_across_tau((n, edges, scores) in arb_scored_dag()) {
        let graph = build(n, &edges);
        let provider = provider_for(&scores);
        let mut previous: Option<BTreeSet<NodeId>> = None;
        for tau in 1..=5u8 {
            let result = grasp_traverse(
                &scenario(),
                &graph,
                &provider,
                &PromptSet::bundled(),
                Tau::new(tau).unwrap(),
            )
            .unwrap();
            let relevant = result.trace.relevant.clone();
            if let Some(previous) = &previous {
                prop_assert!(
                    relevant.is_subset(previous),
                    "tau {} grew the relevant set",
                    tau
                );
            }
            previous = Some(relevant);
        }
    }

    #[test]
    fn every_node_is_visited((n, edges, scores) in arb_scored_dag()) {
        let graph = build(n, &edges);
        let provider = provider_for(&scores);
        let result =
            grasp_traverse(&scenario(), &graph, &provider, &PromptSet::bundled(), Tau::DEFAULT)
                .unwrap();
        prop_assert_eq!(result.trace.visited.len(), n as usize);
        prop_assert_eq!(result.trace.entries.len(), n as usize);
    }

    #[test]
    fn replayed_traversals_are_identical((n, edges, scores) in arb_scored_dag()) {
        let graph = build(n, &edges);
        let provider = provider_for(&scores);
        let prompts = PromptSet::bundled();
        let one = grasp_traverse(&scenario(), &graph, &provider, &prompts, Tau::DEFAULT).unwrap();
        let two = grasp_traverse(&scenario(), &graph, &provider, &prompts, Tau::DEFAULT).unwrap();
        prop_assert_eq!(one, two);
    }

    #[test]
    fn provider_calls_stay_within_budget((n, edges, scores) in arb_scored_dag()) {
        let graph = build(n, &edges);
        let provider = provider_for(&scores);
        let result =
            grasp_traverse(&scenario(), &graph, &provider, &PromptSet::bundled(), Tau::DEFAULT)
                .unwrap();
        let budget = 2 + 2 * n as u64;
        prop_assert!(result.usage.calls <= budget);
        let all_applied = result.trace.applied().count() == n as usize;
        prop_assert_eq!(result.usage.calls == budget, all_applied);
        // Iterations: seed + evaluated nodes + revise.
        prop_assert_eq!(
            result.trace.iteration_count as usize,
            2 + result.trace.evaluated().count()
        );
    }
}

#[test]
fn bundled_graph_all_relevant_hits_the_iteration_ceiling() {
    let text = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/scp28.json"),
    )
    .unwrap();
    let graph = parse_graph(&text).unwrap().graph;
    let provider = ScriptedProvider::new(5);
    let result =
        grasp_traverse(&scenario(), &graph, &provider, &PromptSet::bundled(), Tau::new(1).unwrap())
            .unwrap();
    assert_eq!(result.trace.iteration_count, 30);
    assert_eq!(result.trace.applied().count(), 28);
    assert_eq!(result.usage.calls, 2 + 2 * 28);
}

#[test]
fn bundled_graph_strategy_shapes() {
    use grasp_core::engine::{run_strategy, StrategyId};
    use grasp_core::provider::{Provider, ProviderError, Reply, RequestContext, Usage};
    use std::sync::Mutex;

    struct CaptureAll(Mutex<Vec<(grasp_core::provider::Step, String)>>);
    impl Provider for CaptureAll {
        fn complete(&self, ctx: &RequestContext, prompt: &str) -> Result<Reply, ProviderError> {
            self.0.lock().unwrap().push((ctx.step, prompt.to_string()));
            Ok(Reply { text: "```\ncode\n```".into(), usage: Usage::one_call(1, 1) })
        }
        fn deterministic(&self) -> bool {
            true
        }
    }

    let text = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/scp28.json"),
    )
    .unwrap();
    let graph = parse_graph(&text).unwrap().graph;

    // Forced-open traversal: one seed, 28 applies, one revise, no assess.
    let provider = CaptureAll(Mutex::new(Vec::new()));
    let run = run_strategy(
        StrategyId::FullTraversal,
        &scenario(),
        Some(&graph),
        &provider,
        &PromptSet::bundled(),
        Tau::DEFAULT,
    )
    .unwrap();
    {
        use grasp_core::provider::Step;
        let calls = provider.0.lock().unwrap();
        assert_eq!(calls.len(), 30);
        assert_eq!(calls.iter().filter(|(s, _)| *s == Step::Apply).count(), 28);
        assert_eq!(calls.iter().filter(|(s, _)| *s == Step::Assess).count(), 0);
    }
    assert_eq!(run.iterations, 30);

    // Flattened list: exactly one call whose prompt carries all 28 texts.
    let provider = CaptureAll(Mutex::new(Vec::new()));
    run_strategy(
        StrategyId::FlatScp,
        &scenario(),
        Some(&graph),
        &provider,
        &PromptSet::bundled(),
        Tau::DEFAULT,
    )
    .unwrap();
    let calls = provider.0.lock().unwrap();
    assert_eq!(calls.len(), 1);
    for node in graph.nodes() {
        assert!(calls[0].1.contains(&node.text), "missing practice {}", node.id);
    }
}

#[test]
fn irrelevant_root_floors_the_iteration_count() {
    let text = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/scp28.json"),
    )
    .unwrap();
    let graph = parse_graph(&text).unwrap().graph;
    let provider = ScriptedProvider::new(5).with_score(NodeId(0), 1);
    let result =
        grasp_traverse(&scenario(), &graph, &provider, &PromptSet::bundled(), Tau::DEFAULT)
            .unwrap();
    // Seed + root evaluation + revise: the observed minimum.
    assert_eq!(result.trace.iteration_count, 3);
    assert!(result.trace.relevant.is_empty());
    assert_eq!(result.trace.visited.len(), 28);
}
