//! Property tests for the structural invariants that hold on every graph.

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use std::collections::BTreeSet;

use htc_core::htc::{classify, htc_infinite_to_one, VerdictKind};
use htc_core::{MixedGraph, NodeId, NodeSet};

/// Graphs on up to `max_m` nodes with roughly a quarter of all slots filled.
fn arb_graph(max_m: usize) -> impl Strategy<Value = MixedGraph> {
    (1..=max_m).prop_flat_map(|m| {
        let d_slots = m * (m - 1);
        let b_slots = m * (m - 1) / 2;
        (
            Just(m),
            prop::collection::vec(prop::bool::weighted(0.25), d_slots),
            prop::collection::vec(prop::bool::weighted(0.25), b_slots),
        )
            .prop_map(|(m, d_mask, b_mask)| {
                let mut directed = Vec::new();
                let mut ix = 0;
                for u in 1..=m {
                    for v in 1..=m {
                        if u != v {
                            if d_mask[ix] {
                                directed.push((u, v));
                            }
                            ix += 1;
                        }
                    }
                }
                let mut bidirected = Vec::new();
                let mut ix = 0;
                for u in 1..=m {
                    for v in (u + 1)..=m {
                        if b_mask[ix] {
                            bidirected.push((u, v));
                        }
                        ix += 1;
                    }
                }
                MixedGraph::new(m, directed, bidirected).unwrap()
            })
    })
}

/// Half-trek reachability by explicit walk enumeration: a half-trek either
/// starts along a directed edge out of `v` or crosses to a sibling first,
/// then follows directed edges.
fn half_trek_reach_by_walks(g: &MixedGraph, v: NodeId) -> NodeSet {
    let mut seen = NodeSet::new();
    let mut stack: Vec<NodeId> = g.children(v).to_vec();
    stack.extend(g.siblings(v).iter().copied());
    while let Some(w) = stack.pop() {
        if seen.insert(w) {
            stack.extend(g.children(w).iter().copied());
        }
    }
    seen.remove(&v);
    for s in g.siblings(v) {
        seen.remove(s);
    }
    seen
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn htr_avoids_self_and_siblings(g in arb_graph(7)) {
        for v in g.nodes() {
            let htr = g.htr(v);
            prop_assert!(!htr.contains(&v));
            for s in g.siblings(v) {
                prop_assert!(!htr.contains(s));
            }
        }
    }

    #[test]
    fn htr_matches_walk_enumeration(g in arb_graph(6)) {
        for v in g.nodes() {
            prop_assert_eq!(g.htr(v), half_trek_reach_by_walks(&g, v));
        }
    }

    #[test]
    fn canonical_form_is_permutation_invariant(g in arb_graph(6), seed in any::<u64>()) {
        let m = g.node_count();
        let mut perm: Vec<usize> = (0..m).collect();
        perm.shuffle(&mut StdRng::seed_from_u64(seed));
        let relabeled = g.relabel(&perm).unwrap();
        prop_assert_eq!(
            g.canonical_form().unwrap(),
            relabeled.canonical_form().unwrap()
        );
    }

    #[test]
    fn mixed_components_partition_the_edges(g in arb_graph(7)) {
        prop_assume!(g.is_acyclic());
        let comps = g.mixed_components().unwrap();
        let d_total: usize = comps.iter().map(|c| c.graph.directed_edges().len()).sum();
        let b_total: usize = comps.iter().map(|c| c.graph.bidirected_edges().len()).sum();
        prop_assert_eq!(d_total, g.directed_edges().len());
        prop_assert_eq!(b_total, g.bidirected_edges().len());
        // every node belongs to exactly one core
        let cores: Vec<NodeId> = comps.iter().flat_map(|c| c.core.iter().copied()).collect();
        let distinct: BTreeSet<NodeId> = cores.iter().copied().collect();
        prop_assert_eq!(cores.len(), g.node_count());
        prop_assert_eq!(distinct.len(), g.node_count());
    }

    #[test]
    fn over_edged_graphs_are_infinite_to_one_via_both_routes(g in arb_graph(5)) {
        let m = g.node_count();
        let edges = g.directed_edges().len() + g.bidirected_edges().len();
        prop_assume!(edges > m * (m - 1) / 2);
        prop_assert_eq!(classify(&g).kind(), VerdictKind::InfiniteToOne);
        prop_assert!(htc_infinite_to_one(&g));
    }

    #[test]
    fn witnesses_always_validate(g in arb_graph(5)) {
        if let Some(w) = htc_core::htc::htc_identifiable(&g) {
            prop_assert!(w.validate(&g).is_ok());
        }
    }

    #[test]
    fn serialization_round_trips(g in arb_graph(7)) {
        let text = g.to_text();
        prop_assert_eq!(MixedGraph::parse(&text).unwrap(), g);
    }
}

#[test]
fn canonical_form_invariance_at_the_size_cap() {
    let g = MixedGraph::new(
        8,
        [(1, 2), (2, 3), (3, 8), (4, 5), (8, 6)],
        [(1, 8), (2, 7), (5, 6)],
    )
    .unwrap();
    let mut perm: Vec<usize> = (0..8).collect();
    perm.shuffle(&mut StdRng::seed_from_u64(11));
    let relabeled = g.relabel(&perm).unwrap();
    assert_eq!(
        g.canonical_form().unwrap(),
        relabeled.canonical_form().unwrap()
    );
}
