//! Integer maximum flow on directed networks with node and edge capacities.
//!
//! Node capacities are reduced to the standard edge-capacitated problem by
//! splitting every node `v` into `v_in -> v_out` joined by an edge carrying
//! `v`'s capacity. The flow itself is computed with Dinic's blocking-flow
//! method over the split graph; all capacities here are small integers, so
//! this is far below the problem's complexity budget. Construction order is
//! fixed and ties are broken by edge insertion order, making results
//! deterministic for identical inputs.

use crate::error::{Error, Result};

/// A node or edge capacity. `Unbounded` entries are replaced by the
/// network's finite surrogate bound before solving; callers must choose a
/// surrogate no smaller than any achievable flow.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Capacity {
    Finite(u64),
    Unbounded,
}

impl Capacity {
    fn resolve(self, surrogate: u64) -> u64 {
        match self {
            Capacity::Finite(c) => c,
            Capacity::Unbounded => surrogate,
        }
    }
}

/// A directed network with per-node and per-edge capacities and designated
/// source and sink.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    node_caps: Vec<Capacity>,
    edges: Vec<(usize, usize, Capacity)>,
    source: usize,
    sink: usize,
    surrogate: u64,
}

impl FlowNetwork {
    /// Creates a network on `n` nodes. Source and sink get unbounded
    /// capacity; every other node defaults to unbounded until
    /// [`set_node_cap`] says otherwise.
    ///
    /// [`set_node_cap`]: FlowNetwork::set_node_cap
    pub fn new(n: usize, source: usize, sink: usize, surrogate: u64) -> Self {
        assert!(source < n && sink < n && source != sink);
        FlowNetwork {
            node_caps: vec![Capacity::Unbounded; n],
            edges: Vec::new(),
            source,
            sink,
            surrogate,
        }
    }

    pub fn set_node_cap(&mut self, v: usize, cap: Capacity) {
        assert!(
            v != self.source && v != self.sink,
            "source and sink keep unbounded capacity"
        );
        self.node_caps[v] = cap;
    }

    /// Adds a directed edge; self-loops are rejected. Returns the edge index
    /// used in [`FlowResult::edge_flow`].
    pub fn add_edge(&mut self, from: usize, to: usize, cap: Capacity) -> usize {
        assert!(from != to, "self-loop edges are not allowed");
        assert!(from < self.node_caps.len() && to < self.node_caps.len());
        self.edges.push((from, to, cap));
        self.edges.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.node_caps.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize, Capacity)] {
        &self.edges
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }
}

/// An integral flow: total size plus per-edge flow parallel to the network's
/// edge list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowResult {
    pub size: u64,
    pub edge_flow: Vec<u64>,
}

struct Dinic {
    // arcs stored as pairs: arc 2k is forward, 2k + 1 its residual twin
    to: Vec<usize>,
    cap: Vec<u64>,
    adj: Vec<Vec<usize>>,
    level: Vec<u32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            to: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); n],
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    fn add(&mut self, u: usize, v: usize, c: u64) -> usize {
        let id = self.to.len();
        self.to.push(v);
        self.cap.push(c);
        self.adj[u].push(id);
        self.to.push(u);
        self.cap.push(0);
        self.adj[v].push(id + 1);
        id
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(u32::MAX);
        self.level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] == u32::MAX {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] != u32::MAX
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: u64) -> u64 {
        if u == t {
            return pushed;
        }
        while self.iter[u] < self.adj[u].len() {
            let e = self.adj[u][self.iter[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && self.level[v] == self.level[u] + 1 {
                let got = self.dfs(v, t, pushed.min(self.cap[e]));
                if got > 0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            self.iter[u] += 1;
        }
        0
    }

    fn run(&mut self, s: usize, t: usize) -> u64 {
        let mut total = 0;
        while self.bfs(s, t) {
            self.iter.fill(0);
            loop {
                let got = self.dfs(s, t, u64::MAX);
                if got == 0 {
                    break;
                }
                total += got;
            }
        }
        total
    }
}

/// Computes an integral maximum flow respecting node and edge capacities.
pub fn max_flow(net: &FlowNetwork) -> FlowResult {
    let n = net.node_caps.len();
    // split: node v -> in = 2v, out = 2v + 1
    let mut dinic = Dinic::new(2 * n);
    for (v, &cap) in net.node_caps.iter().enumerate() {
        dinic.add(2 * v, 2 * v + 1, cap.resolve(net.surrogate));
    }
    let mut arc_of_edge = Vec::with_capacity(net.edges.len());
    for &(u, v, cap) in &net.edges {
        arc_of_edge.push(dinic.add(2 * u + 1, 2 * v, cap.resolve(net.surrogate)));
    }
    let size = dinic.run(2 * net.source + 1, 2 * net.sink);
    let edge_flow = net
        .edges
        .iter()
        .zip(&arc_of_edge)
        .map(|(&(_, _, cap), &arc)| cap.resolve(net.surrogate) - dinic.cap[arc])
        .collect();
    FlowResult { size, edge_flow }
}

/// Decomposes an integral flow into unit source-to-sink paths (as node
/// sequences). Flow on cycles, if any, is discarded. The flow is validated
/// against the network first: conservation at internal nodes and all
/// capacity bounds.
pub fn flow_paths(net: &FlowNetwork, result: &FlowResult) -> Result<Vec<Vec<usize>>> {
    validate_flow(net, result)?;
    let n = net.node_caps.len();
    let mut remaining = result.edge_flow.clone();
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ix, &(u, _, _)) in net.edges.iter().enumerate() {
        out_edges[u].push(ix);
    }
    let mut paths = Vec::with_capacity(result.size as usize);
    for _ in 0..result.size {
        // walk from source to sink along positive remaining flow, erasing any
        // cycle encountered so the walk always terminates
        let mut path_nodes = vec![net.source];
        loop {
            let u = *path_nodes.last().unwrap();
            if u == net.sink {
                break;
            }
            let e = out_edges[u]
                .iter()
                .copied()
                .find(|&e| remaining[e] > 0)
                .ok_or_else(|| {
                    Error::Contract("flow decomposition stalled: inconsistent flow".into())
                })?;
            remaining[e] -= 1;
            let v = net.edges[e].1;
            if let Some(pos) = path_nodes.iter().position(|&x| x == v) {
                // cycle back to an earlier node: drop the loop, keep its flow
                // units consumed
                path_nodes.truncate(pos + 1);
            } else {
                path_nodes.push(v);
            }
        }
        paths.push(path_nodes);
    }
    Ok(paths)
}

fn validate_flow(net: &FlowNetwork, result: &FlowResult) -> Result<()> {
    if result.edge_flow.len() != net.edges.len() {
        return Err(Error::Contract(
            "flow vector length does not match edge count".into(),
        ));
    }
    let n = net.node_caps.len();
    let mut inflow = vec![0u64; n];
    let mut outflow = vec![0u64; n];
    for (ix, &(u, v, cap)) in net.edges.iter().enumerate() {
        let f = result.edge_flow[ix];
        if f > cap.resolve(net.surrogate) {
            return Err(Error::Contract(format!(
                "flow {f} exceeds capacity on edge {ix}"
            )));
        }
        outflow[u] += f;
        inflow[v] += f;
    }
    for v in 0..n {
        if v == net.source || v == net.sink {
            continue;
        }
        if inflow[v] != outflow[v] {
            return Err(Error::Contract(format!(
                "conservation violated at node {v}"
            )));
        }
        if inflow[v] > net.node_caps[v].resolve(net.surrogate) {
            return Err(Error::Contract(format!(
                "node capacity exceeded at node {v}"
            )));
        }
    }
    if outflow[net.source] as i128 - inflow[net.source] as i128 != result.size as i128 {
        return Err(Error::Contract("flow size does not match source".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn cap(c: u64) -> Capacity {
        Capacity::Finite(c)
    }

    #[test]
    fn single_bottleneck_node() {
        // s -> a -> t with node cap a = 1
        let mut net = FlowNetwork::new(3, 0, 2, 10);
        net.set_node_cap(1, cap(1));
        net.add_edge(0, 1, Capacity::Unbounded);
        net.add_edge(1, 2, Capacity::Unbounded);
        assert_eq!(max_flow(&net).size, 1);
    }

    #[test]
    fn disjoint_paths() {
        // s -> a -> t, s -> b -> t, node caps 1
        let mut net = FlowNetwork::new(4, 0, 3, 10);
        net.set_node_cap(1, cap(1));
        net.set_node_cap(2, cap(1));
        net.add_edge(0, 1, Capacity::Unbounded);
        net.add_edge(1, 3, Capacity::Unbounded);
        net.add_edge(0, 2, Capacity::Unbounded);
        net.add_edge(2, 3, Capacity::Unbounded);
        let result = max_flow(&net);
        assert_eq!(result.size, 2);
        let paths = flow_paths(&net, &result).unwrap();
        assert_eq!(paths.len(), 2);
        let mut sorted = paths.clone();
        sorted.sort();
        assert_eq!(sorted, vec![vec![0, 1, 3], vec![0, 2, 3]]);
    }

    #[test]
    fn shared_middle_node() {
        // s -> a -> c -> t and s -> b -> c -> t, caps a = b = c = 1
        let mut net = FlowNetwork::new(5, 0, 4, 10);
        for v in 1..4 {
            net.set_node_cap(v, cap(1));
        }
        net.add_edge(0, 1, Capacity::Unbounded);
        net.add_edge(0, 2, Capacity::Unbounded);
        net.add_edge(1, 3, Capacity::Unbounded);
        net.add_edge(2, 3, Capacity::Unbounded);
        net.add_edge(3, 4, Capacity::Unbounded);
        let result = max_flow(&net);
        assert_eq!(result.size, 1);
        let paths = flow_paths(&net, &result).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].first(), Some(&0));
        assert_eq!(paths[0].last(), Some(&4));
    }

    #[test]
    fn zero_flow_gives_empty_path_list() {
        let mut net = FlowNetwork::new(3, 0, 2, 5);
        net.add_edge(0, 1, cap(1)); // no edge into the sink
        let result = max_flow(&net);
        assert_eq!(result.size, 0);
        assert!(flow_paths(&net, &result).unwrap().is_empty());
    }

    #[test]
    fn inconsistent_flow_rejected() {
        let mut net = FlowNetwork::new(3, 0, 2, 5);
        net.add_edge(0, 1, cap(1));
        net.add_edge(1, 2, cap(1));
        let bogus = FlowResult {
            size: 1,
            edge_flow: vec![1, 0],
        };
        assert!(flow_paths(&net, &bogus).is_err());
    }

    #[test]
    fn deterministic_results() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let net = random_network(&mut rng);
            assert_eq!(max_flow(&net), max_flow(&net));
        }
    }

    fn random_network(rng: &mut StdRng) -> FlowNetwork {
        let n = rng.random_range(3..=8);
        let mut net = FlowNetwork::new(n, 0, n - 1, 100);
        for v in 1..n - 1 {
            if rng.random_bool(0.7) {
                net.set_node_cap(v, cap(rng.random_range(0..=3)));
            }
        }
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.random_bool(0.4) {
                    net.add_edge(u, v, cap(rng.random_range(0..=3)));
                }
            }
        }
        net
    }

    /// Exhaustive min-cut over the split graph: every edge crossing a
    /// source-side/sink-side partition of split nodes contributes its
    /// capacity.
    fn min_cut_exhaustive(net: &FlowNetwork) -> u64 {
        let n = net.node_count();
        let mut arcs: Vec<(usize, usize, u64)> = Vec::new();
        for (v, &c) in net.node_caps.iter().enumerate() {
            arcs.push((2 * v, 2 * v + 1, c.resolve(100)));
        }
        for &(u, v, c) in net.edges() {
            arcs.push((2 * u + 1, 2 * v, c.resolve(100)));
        }
        let s = 2 * net.source() + 1;
        let t = 2 * net.sink();
        let free: Vec<usize> = (0..2 * n).filter(|&x| x != s && x != t).collect();
        let mut best = u64::MAX;
        for mask in 0u32..(1 << free.len()) {
            let mut side = vec![false; 2 * n]; // true = source side
            side[s] = true;
            for (bit, &node) in free.iter().enumerate() {
                side[node] = mask & (1 << bit) != 0;
            }
            let cut: u64 = arcs
                .iter()
                .filter(|&&(u, v, _)| side[u] && !side[v])
                .map(|&(_, _, c)| c)
                .sum();
            best = best.min(cut);
        }
        best
    }

    #[test]
    fn max_flow_equals_min_cut_on_random_networks() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..30 {
            let n = rng.random_range(3..=5); // split graph stays enumerable
            let mut net = FlowNetwork::new(n, 0, n - 1, 100);
            for v in 1..n - 1 {
                net.set_node_cap(v, cap(rng.random_range(0..=3)));
            }
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.random_bool(0.5) {
                        net.add_edge(u, v, cap(rng.random_range(0..=3)));
                    }
                }
            }
            let flow = max_flow(&net);
            assert_eq!(flow.size, min_cut_exhaustive(&net), "{net:?}");
            flow_paths(&net, &flow).unwrap();
        }
    }

    #[test]
    fn flow_respects_capacities_and_conservation() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..40 {
            let net = random_network(&mut rng);
            let result = max_flow(&net);
            validate_flow(&net, &result).unwrap();
            let paths = flow_paths(&net, &result).unwrap();
            assert_eq!(paths.len(), result.size as usize);
        }
    }
}
