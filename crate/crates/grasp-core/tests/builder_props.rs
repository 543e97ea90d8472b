//! Assembly/repair properties: the output always validates, and repair
//! only removes classified edges — the root attachments are the sole
//! additions.

use std::collections::BTreeSet;

use proptest::prelude::*;

use grasp_core::builder::{assemble_and_repair, PairClassification, PairRelation, PracticeRecord};
use grasp_core::graph::NodeId;

fn records(n: usize) -> Vec<PracticeRecord> {
    (0..n)
        .map(|i| PracticeRecord {
            source_id: format!("p{i:03}"),
            text: format!("raw practice {i}"),
            normalized_text: format!("Practice {i}."),
            included: true,
            exclusion_reason: None,
        })
        .collect()
}

fn arb_classifications() -> impl Strategy<Value = (usize, Vec<PairClassification>)> {
    (3usize..=7).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        let relation = prop_oneof![
            Just(PairRelation::None),
            Just(PairRelation::SequentialAb),
            Just(PairRelation::SequentialBa),
            Just(PairRelation::SpecificityAb),
            Just(PairRelation::SpecificityBa),
        ];
        proptest::collection::vec((relation, 0.0f64..=1.0), pairs.len()).prop_map(move |choices| {
            let classifications = pairs
                .iter()
                .zip(choices)
                .map(|(&(i, j), (relation, confidence))| PairClassification {
                    a: format!("p{i:03}"),
                    b: format!("p{j:03}"),
                    relation,
                    confidence,
                })
                .collect();
            (n, classifications)
        })
    })
}

/// Closure oracle over plain pairs.
fn closure_of(n: usize, edges: &BTreeSet<(u32, u32)>) -> BTreeSet<(u32, u32)> {
    let mut reach = edges.clone();
    loop {
        let mut grew = false;
        let snapshot: Vec<(u32, u32)> = reach.iter().copied().collect();
        for &(a, b) in &snapshot {
            for &(c, d) in &snapshot {
                if b == c && reach.insert((a, d)) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
        let _ = n;
    }
    reach
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn repaired_graphs_always_validate((n, classifications) in arb_classifications()) {
        let records = records(n);
        let assembled = assemble_and_repair(&classifications, &records, "p000").unwrap();
        let report = assembled.graph.validate();
        prop_assert!(report.is_valid(), "repair left violations: {report}");
        prop_assert_eq!(assembled.graph.node_count(), n);
    }

    #[test]
    fn repair_never_invents_non_root_edges((n, classifications) in arb_classifications()) {
        let records = records(n);
        let assembled = assemble_and_repair(&classifications, &records, "p000").unwrap();
        let root = assembled.graph.root();

        // The classified relation set, as directed pairs over node ids.
        // Node ids equal source indices here because source ids sort in
        // construction order and p000 is the root.
        let mut input_edges: BTreeSet<(u32, u32)> = BTreeSet::new();
        for c in &classifications {
            let a: u32 = c.a[1..].parse().unwrap();
            let b: u32 = c.b[1..].parse().unwrap();
            match c.relation {
                PairRelation::None => {}
                PairRelation::SequentialAb | PairRelation::SpecificityAb => {
                    input_edges.insert((a, b));
                }
                PairRelation::SequentialBa | PairRelation::SpecificityBa => {
                    input_edges.insert((b, a));
                }
            }
        }

        let output_edges: BTreeSet<(u32, u32)> = assembled
            .graph
            .edges()
            .filter(|e| e.from != root)
            .map(|e| (e.from.0, e.to.0))
            .collect();
        let input_closure = closure_of(n, &input_edges);
        let output_closure = closure_of(n, &output_edges);
        prop_assert!(
            output_closure.is_subset(&input_closure),
            "repair invented reachability not present in the classifications"
        );
    }

    #[test]
    fn every_surviving_edge_has_provenance((n, classifications) in arb_classifications()) {
        let records = records(n);
        let assembled = assemble_and_repair(&classifications, &records, "p000").unwrap();
        for edge in assembled.graph.edges() {
            prop_assert!(
                assembled.provenance.contains_key(&(edge.from, edge.to)),
                "edge {} -> {} has no provenance",
                edge.from,
                edge.to
            );
        }
    }
}

#[test]
fn bundled_graph_review_has_one_section_per_node() {
    use grasp_core::builder::{export_review, RepairLog};
    use std::collections::BTreeMap;

    let text = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/scp28.json"),
    )
    .unwrap();
    let graph = grasp_core::graph::parse_graph(&text).unwrap().graph;
    let review = export_review(&graph, &RepairLog::default(), &BTreeMap::new());
    let node_lines = review.lines().filter(|l| l.starts_with('[')).count();
    assert_eq!(node_lines, 28);
    let edge_lines =
        review.lines().filter(|l| l.contains(" -> ") && !l.starts_with("removed")).count();
    assert_eq!(edge_lines, graph.edge_count());
}

#[test]
fn node_ids_are_root_first_then_source_order() {
    let records = records(4);
    let classifications = vec![PairClassification {
        a: "p001".into(),
        b: "p003".into(),
        relation: PairRelation::SpecificityAb,
        confidence: 0.9,
    }];
    let assembled = assemble_and_repair(&classifications, &records, "p000").unwrap();
    let tags: Vec<String> = assembled
        .graph
        .nodes()
        .map(|node| node.tags.first().cloned().unwrap_or_default())
        .collect();
    assert_eq!(tags, vec!["src:p000", "src:p001", "src:p002", "src:p003"]);
    assert_eq!(assembled.graph.root(), NodeId(0));
}
