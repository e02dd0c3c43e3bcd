//! Shared fixtures for unit tests.

use rand::rngs::StdRng;
use rand::Rng;

use crate::graph::MixedGraph;

/// The instrumental-variable graph: 1 -> 2 -> 3 with 2 <-> 3.
pub fn iv_graph() -> MixedGraph {
    MixedGraph::new(3, [(1, 2), (2, 3)], [(2, 3)]).unwrap()
}

/// Five-node chain 1 -> 2 -> 3 -> 4 -> 5 with 1 <-> 4 and 1 <-> 5.
pub fn chain5_graph() -> MixedGraph {
    MixedGraph::new(5, [(1, 2), (2, 3), (3, 4), (4, 5)], [(1, 4), (1, 5)]).unwrap()
}

/// Uniformly random graph on up to `max_m` nodes with at most `m choose 2`
/// total edges. With `acyclic` set, directed edges only point upward.
pub fn random_graph(rng: &mut StdRng, max_m: usize, acyclic: bool) -> MixedGraph {
    let m = rng.random_range(1..=max_m);
    let mut directed_slots = Vec::new();
    let mut bidirected_slots = Vec::new();
    for u in 1..=m {
        for v in 1..=m {
            if u < v {
                bidirected_slots.push((u, v));
                directed_slots.push((u, v));
                if !acyclic {
                    directed_slots.push((v, u));
                }
            }
        }
    }
    let budget = m * (m - 1) / 2;
    let n_edges = if budget == 0 {
        0
    } else {
        rng.random_range(0..=budget)
    };
    let mut slots: Vec<(bool, (usize, usize))> = directed_slots
        .into_iter()
        .map(|e| (true, e))
        .chain(bidirected_slots.into_iter().map(|e| (false, e)))
        .collect();
    // partial Fisher-Yates: the first n_edges entries become the sample
    for i in 0..n_edges.min(slots.len()) {
        let j = rng.random_range(i..slots.len());
        slots.swap(i, j);
    }
    slots.truncate(n_edges.min(slots.len()));
    let directed = slots.iter().filter(|(d, _)| *d).map(|&(_, e)| e);
    let bidirected = slots.iter().filter(|(d, _)| !*d).map(|&(_, e)| e);
    MixedGraph::new(m, directed, bidirected).unwrap()
}
